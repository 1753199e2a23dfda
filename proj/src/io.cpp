#include "kgscat/io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace kgscat {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

void put_le(std::ostream& os, double v)
{
    auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
    os.write(b, 8);
}

double get_le(const unsigned char* b)
{
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
    return std::bit_cast<double>(bits);
}

constexpr const char* blob_magic = "KGSFIELD 1";

}  // namespace

std::string format_double(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows)
{
    auto os = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::invalid_argument("CSV row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << '\n';
    }
}

void write_series_csv(const std::filesystem::path& path, const DiagnosticSeries& s)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < s.size(); ++i) rows.push_back({s.t[i], s.integrand[i], s.running[i]});
    write_csv(path, {"t", "integrand", "running"}, rows);
}

void write_field_blob(const std::filesystem::path& path, const ComplexField2P& f, double t)
{
    nlohmann::json h;
    h["d"] = f.grid.d;
    h["n"] = f.grid.n;
    h["L"] = f.grid.L;
    h["particles"] = 2;
    h["representation"] = f.rep == Representation::position ? "position" : "momentum";
    h["t"] = t;
    h["dtype"] = "<f8";
    h["layout"] = "row-major, axis 0 slowest, interleaved re im";
    h["count"] = f.values.size();
    auto os = open_out(path, std::ios::out | std::ios::binary);
    os << blob_magic << '\n' << h.dump() << '\n';
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        put_le(os, f.values[i].real());
        put_le(os, f.values[i].imag());
    }
}

FieldBlob read_field_blob(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::string magic, header;
    std::getline(is, magic);
    if (magic != blob_magic) throw std::runtime_error(path.string() + " is not a field blob");
    std::getline(is, header);
    const auto h = nlohmann::json::parse(header);
    if (h.at("dtype") != "<f8") throw std::runtime_error("unsupported blob dtype");
    const auto g = make_grid(h.at("d").get<int>(), h.at("n").get<int>(), h.at("L").get<double>());
    const auto rep = h.at("representation") == "position" ? Representation::position : Representation::momentum;
    FieldBlob out{ComplexField2P(g, rep), h.at("t").get<double>()};
    const auto count = h.at("count").get<std::size_t>();
    if (count != g.points(2)) throw std::runtime_error("blob size does not match its grid");
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (data.size() != 16 * count) throw std::runtime_error("truncated field blob");
    for (std::size_t i = 0; i < count; ++i)
        out.field.values[static_cast<Eigen::Index>(i)] = {get_le(&data[16 * i]), get_le(&data[16 * i + 8])};
    return out;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::vector<char> data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return fnv1a(data.data(), data.size());
}

std::string hex64(std::uint64_t v)
{
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

}  // namespace kgscat
