#include "osa/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "osa/errors.hpp"

namespace osa {

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "binary32 storage requires IEEE-754");

constexpr char kMagic[4] = {'O', 'S', 'A', 'E'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kFlagLabels = 1u << 0;
// Upper bound on element count per matrix; anything above is a corrupt or
// hostile header, not a real dump.
constexpr std::uint64_t kMaxElements = 1ull << 40;

template <typename T>
void put_le(std::string& buf, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const char* p) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return static_cast<T>(v);
}

void write_f32_le(std::ofstream& out, const MatF& m) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(m.data.data()),
                  static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    } else {
        std::string buf;
        buf.reserve(m.data.size() * sizeof(float));
        for (float f : m.data) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof(bits));
            put_le(buf, bits);
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

void read_f32_le(std::ifstream& in, MatF& m) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(m.data.data()),
                static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    } else {
        std::vector<char> buf(m.data.size() * sizeof(float));
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            const std::uint32_t bits = get_le<std::uint32_t>(buf.data() + i * 4);
            std::memcpy(&m.data[i], &bits, sizeof(float));
        }
    }
    if (!in) throw TruncatedFileError("OSAE: file ends inside a matrix block");
}

}  // namespace

void save(const PairDataset& ds, const std::filesystem::path& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("OSAE: cannot open for writing: " + path.string());

    std::string header;
    header.append(kMagic, 4);
    put_le(header, kVersion);
    put_le(header, static_cast<std::uint16_t>(ds.has_labels() ? kFlagLabels : 0));
    put_le(header, static_cast<std::uint64_t>(ds.n));
    put_le(header, static_cast<std::uint32_t>(ds.d));
    put_le(header, static_cast<std::uint32_t>(0));  // reserved
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    write_f32_le(out, ds.x);
    write_f32_le(out, ds.y);
    if (ds.has_labels())
        out.write(reinterpret_cast<const char*>(ds.labels.data()),
                  static_cast<std::streamsize>(ds.labels.size()));
    out.flush();
    if (!out) throw Error("OSAE: write failed: " + path.string());
}

PairDataset load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("OSAE: cannot open for reading: " + path.string());

    char header[24];
    in.read(header, sizeof(header));
    if (in.gcount() < static_cast<std::streamsize>(sizeof(header)))
        throw TruncatedFileError("OSAE: file shorter than the 24-byte header");
    if (std::memcmp(header, kMagic, 4) != 0)
        throw BadMagicError("OSAE: bad magic bytes");
    const auto version = get_le<std::uint16_t>(header + 4);
    if (version != kVersion)
        throw UnsupportedVersionError("OSAE: unsupported version " + std::to_string(version));
    const auto flags = get_le<std::uint16_t>(header + 6);
    const auto n = get_le<std::uint64_t>(header + 8);
    const auto d = get_le<std::uint32_t>(header + 16);
    // reserved u32 at offset 20 is ignored on load.

    if (n == 0 || d == 0) throw ShapeOverflowError("OSAE: header declares an empty shape");
    if (n > kMaxElements / d)
        throw ShapeOverflowError("OSAE: n*d exceeds the supported element count");
    const std::uint64_t elements = n * static_cast<std::uint64_t>(d);

    // n*d <= 2^40, so the byte count fits comfortably in u64. Checking the
    // real file size up front avoids allocating for a lying header.
    const std::uint64_t expected = 24 + 8 * elements + ((flags & kFlagLabels) ? n : 0);
    std::error_code ec;
    const auto actual = std::filesystem::file_size(path, ec);
    if (!ec && actual < expected)
        throw TruncatedFileError("OSAE: file has " + std::to_string(actual) +
                                 " bytes, header implies " + std::to_string(expected));

    PairDataset ds;
    ds.n = static_cast<std::size_t>(n);
    ds.d = static_cast<std::size_t>(d);
    ds.x = MatF(ds.n, ds.d);
    ds.y = MatF(ds.n, ds.d);
    read_f32_le(in, ds.x);
    read_f32_le(in, ds.y);
    if (flags & kFlagLabels) {
        ds.labels.resize(ds.n);
        in.read(reinterpret_cast<char*>(ds.labels.data()),
                static_cast<std::streamsize>(ds.n));
        if (!in) throw TruncatedFileError("OSAE: file ends inside the labels block");
    }
    ds.validate();
    return ds;
}

}  // namespace osa
