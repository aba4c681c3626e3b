#ifndef PTOMO_IO_HPP
#define PTOMO_IO_HPP

#include "reconstruct.hpp"
#include "tensor_inversion.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

// File formats. Each file starts with one text header line terminated by
// '\n', followed by little-endian float64 (re, im) pairs.
//
//   PTVOL1 <n> <half_width> <components> <complex 0|1> [<r0>]
//       components = 1 for a scalar volume, 6 (f11 f22 f33 f12 f13 f23,
//       each in x-fastest order) plus r0 for a tensor field.
//   PTSIN1 <kind> <18 numbers: six view vectors> <K> <M_slice> <M_det> <half_width>
//       view-major, then angle, slice, detector.
//   PTLAM1 <kind> <same fields as PTSIN1>
//       six concatenated blocks; kind is residual or classical.

namespace ptomo::io {

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void write_values(std::ostream& out, const std::vector<cplx>& values)
{
    std::vector<double> raw(2 * values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        raw[2 * i] = values[i].real();
        raw[2 * i + 1] = values[i].imag();
    }
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& d : raw) {
            auto bits = std::bit_cast<std::uint64_t>(d);
            bits = __builtin_bswap64(bits);
            d = std::bit_cast<double>(bits);
        }
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
}

inline std::vector<cplx> read_values(std::istream& in, std::size_t count, bool complex_values, const std::string& what)
{
    const std::size_t per = complex_values ? 2 : 1;
    std::vector<double> raw(per * count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != raw.size() * sizeof(double))
        throw FormatError(what + ": truncated data section");
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& d : raw)
            d = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(d)));
    }
    std::vector<cplx> values(count);
    for (std::size_t i = 0; i < count; ++i)
        values[i] = complex_values ? cplx(raw[2 * i], raw[2 * i + 1]) : cplx(raw[i], 0.0);
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError(what + ": trailing bytes after data section");
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw FormatError(what + ": non-finite value");
    return values;
}

inline std::istringstream read_header(std::istream& in, const std::string& magic, const std::string& what)
{
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(what + ": missing header");
    std::istringstream header(line);
    std::string m;
    header >> m;
    if (m != magic)
        throw FormatError(what + ": expected magic " + magic + ", found '" + m + "'");
    return header;
}

template <typename T>
T field_from(std::istringstream& header, const std::string& name, const std::string& what)
{
    T v{};
    if (!(header >> v))
        throw FormatError(what + ": header field '" + name + "' missing or malformed");
    return v;
}

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open '" + path + "' for reading");
    return in;
}

inline void write_views_header(std::ostream& out, const std::string& magic, const Sinogram& s)
{
    const ViewSet& v = s.views();
    require(v.view_count() == 6, "sinogram files hold exactly six views");
    out << magic << ' ' << to_string(s.kind());
    for (const auto& w : v.omegas)
        for (int a = 0; a < 3; ++a)
            out << ' ' << format_double(w[a]);
    out << ' ' << v.angles_per_view << ' ' << v.slice_count << ' ' << v.detector_count << ' '
        << format_double(v.half_width) << '\n';
}

inline Sinogram read_views(std::istream& in, const std::string& magic, const std::string& what)
{
    auto header = read_header(in, magic, what);
    const auto kind = sinogram_kind_from_string(field_from<std::string>(header, "kind", what));
    ViewSet v;
    for (int i = 0; i < 6; ++i) {
        Vec3 w;
        for (int a = 0; a < 3; ++a)
            w[a] = field_from<double>(header, "view vector", what);
        try {
            v.omegas.emplace_back(w);
        } catch (const InvalidParameter&) {
            throw FormatError(what + ": view vector " + std::to_string(i) + " is not a unit vector");
        }
    }
    v.angles_per_view = field_from<int>(header, "K", what);
    v.slice_count = field_from<int>(header, "M_slice", what);
    v.detector_count = field_from<int>(header, "M_det", what);
    v.half_width = field_from<double>(header, "half_width", what);
    if (v.angles_per_view < 1 || v.slice_count < 1 || v.detector_count < 1 || !(v.half_width > 0.0))
        throw FormatError(what + ": invalid sampling parameters");
    Sinogram s(v, kind);
    s.data() = read_values(in, s.data().size(), true, what);
    return s;
}

} // namespace detail

inline void write_volume(std::ostream& out, const ScalarVolume& v)
{
    out << "PTVOL1 " << v.size() << ' ' << format_double(v.half_width()) << " 1 1\n";
    detail::write_values(out, v.data());
}

inline void write_tensor(std::ostream& out, const TensorField& f)
{
    out << "PTVOL1 " << f.size() << ' ' << format_double(f.half_width()) << " 6 1 " << format_double(f.support_radius())
        << '\n';
    std::vector<cplx> all;
    all.reserve(6 * f.component(0).voxel_count());
    for (std::size_t k = 0; k < 6; ++k)
        all.insert(all.end(), f.component(k).data().begin(), f.component(k).data().end());
    detail::write_values(out, all);
}

struct VolumeHeader {
    int n = 0;
    double half_width = 0.0;
    int components = 0;
    bool complex_values = true;
    double r0 = 0.0;
};

inline VolumeHeader read_volume_header(std::istream& in, const std::string& what)
{
    auto header = detail::read_header(in, "PTVOL1", what);
    VolumeHeader h;
    h.n = detail::field_from<int>(header, "n", what);
    h.half_width = detail::field_from<double>(header, "half_width", what);
    h.components = detail::field_from<int>(header, "components", what);
    const int flag = detail::field_from<int>(header, "complex", what);
    if (h.n < 1 || !(h.half_width > 0.0))
        throw FormatError(what + ": invalid grid parameters");
    if (flag != 0 && flag != 1)
        throw FormatError(what + ": complex flag must be 0 or 1");
    h.complex_values = flag == 1;
    if (h.components == 6)
        h.r0 = detail::field_from<double>(header, "r0", what);
    else if (h.components != 1)
        throw FormatError(what + ": component count must be 1 or 6");
    return h;
}

inline ScalarVolume read_volume(std::istream& in, const std::string& what = "volume")
{
    const auto h = read_volume_header(in, what);
    if (h.components != 1)
        throw FormatError(what + ": expected a scalar volume, found " + std::to_string(h.components) + " components");
    ScalarVolume v(h.n, h.half_width);
    v.data() = detail::read_values(in, v.voxel_count(), h.complex_values, what);
    return v;
}

inline TensorField read_tensor(std::istream& in, const std::string& what = "tensor field")
{
    const auto h = read_volume_header(in, what);
    if (h.components != 6)
        throw FormatError(what + ": expected 6 components, found " + std::to_string(h.components));
    if (!(h.r0 > 0.0))
        throw FormatError(what + ": support radius must be positive");
    TensorField f(h.n, h.half_width, h.r0);
    const std::size_t per = f.component(0).voxel_count();
    const auto all = detail::read_values(in, 6 * per, h.complex_values, what);
    for (std::size_t k = 0; k < 6; ++k)
        std::copy(all.begin() + static_cast<std::ptrdiff_t>(k * per), all.begin() + static_cast<std::ptrdiff_t>((k + 1) * per),
                  f.component(k).data().begin());
    return f;
}

inline void write_sinogram(std::ostream& out, const Sinogram& s)
{
    detail::write_views_header(out, "PTSIN1", s);
    detail::write_values(out, s.data());
}

inline Sinogram read_sinogram(std::istream& in, const std::string& what = "sinogram")
{
    return detail::read_views(in, "PTSIN1", what);
}

inline void write_lambda(std::ostream& out, const LambdaData& d)
{
    detail::write_views_header(out, "PTLAM1", d.sinogram());
    detail::write_values(out, d.sinogram().data());
}

inline LambdaData read_lambda(std::istream& in, const std::string& what = "lambda data")
{
    Sinogram s = detail::read_views(in, "PTLAM1", what);
    try {
        return LambdaData(std::move(s));
    } catch (const InvalidParameter& e) {
        throw FormatError(what + ": " + e.what());
    }
}

// Path helpers.
inline void save(const std::string& path, const ScalarVolume& v) { auto o = detail::open_out(path); write_volume(o, v); }
inline void save(const std::string& path, const TensorField& f) { auto o = detail::open_out(path); write_tensor(o, f); }
inline void save(const std::string& path, const Sinogram& s) { auto o = detail::open_out(path); write_sinogram(o, s); }
inline void save(const std::string& path, const LambdaData& d) { auto o = detail::open_out(path); write_lambda(o, d); }
inline ScalarVolume load_volume(const std::string& path) { auto i = detail::open_in(path); return read_volume(i, path); }
inline TensorField load_tensor(const std::string& path) { auto i = detail::open_in(path); return read_tensor(i, path); }
inline Sinogram load_sinogram(const std::string& path) { auto i = detail::open_in(path); return read_sinogram(i, path); }
inline LambdaData load_lambda(const std::string& path) { auto i = detail::open_in(path); return read_lambda(i, path); }

/// Magic of a file on disk ("PTVOL1", "PTSIN1", "PTLAM1", ...).
inline std::string peek_magic(const std::string& path)
{
    auto in = detail::open_in(path);
    std::string m;
    in >> m;
    return m;
}

inline std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

/// History table: n, residual_sup, update_sup, err_sup, err_fourier, seconds.
inline void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history)
{
    out << "n,residual_sup,update_sup,err_sup,err_fourier,seconds\n";
    for (const auto& r : history)
        out << r.n << ',' << format_double(r.residual_sup) << ',' << format_double(r.update_sup) << ','
            << optional_cell(r.err_sup) << ',' << optional_cell(r.err_fourier) << ',' << format_double(r.seconds) << '\n';
}

inline std::vector<IterationRecord> read_history_csv(std::istream& in)
{
    std::string line;
    std::getline(in, line);
    if (line != "n,residual_sup,update_sup,err_sup,err_fourier,seconds")
        throw FormatError("history: unexpected header '" + line + "'");
    std::vector<IterationRecord> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (line.back() == ',')
            cells.emplace_back();
        if (cells.size() != 6)
            throw FormatError("history: expected 6 columns in '" + line + "'");
        IterationRecord r;
        r.n = std::stoi(cells[0]);
        r.residual_sup = std::stod(cells[1]);
        r.update_sup = std::stod(cells[2]);
        if (!cells[3].empty())
            r.err_sup = std::stod(cells[3]);
        if (!cells[4].empty())
            r.err_fourier = std::stod(cells[4]);
        r.seconds = std::stod(cells[5]);
        out.push_back(r);
    }
    return out;
}

/// Grayscale heatmap as binary PPM (equal RGB channels) with a fixed linear
/// ramp from lo (black) to hi (white); the ramp is written next to it in
/// <path>.txt.
inline void write_heatmap(const std::string& path, int width, int height, const std::vector<double>& values, double lo,
                          double hi)
{
    require(values.size() == static_cast<std::size_t>(width) * height, "heatmap: size mismatch");
    auto out = detail::open_out(path);
    out << "P6\n" << width << ' ' << height << "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (int y = height - 1; y >= 0; --y)
        for (int x = 0; x < width; ++x) {
            const double t = std::clamp((values[static_cast<std::size_t>(y) * width + x] - lo) / span, 0.0, 1.0);
            const auto g = static_cast<unsigned char>(std::lround(255.0 * t));
            const char px[3] = {static_cast<char>(g), static_cast<char>(g), static_cast<char>(g)};
            out.write(px, 3);
        }
    auto side = detail::open_out(path + ".txt");
    side << "black " << format_double(lo) << "\nwhite " << format_double(hi) << '\n';
}

/// |value| on the mid-plane z = 0 (index n/2) of a scalar volume, x fastest.
inline std::vector<double> mid_plane_magnitude(const ScalarVolume& v)
{
    const int n = v.size();
    std::vector<double> out(static_cast<std::size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            out[static_cast<std::size_t>(iy) * n + ix] = std::abs(v(ix, iy, n / 2));
    return out;
}

} // namespace ptomo::io

#endif // PTOMO_IO_HPP
