#ifndef PTOMO_TOOLS_COMMANDS_HPP
#define PTOMO_TOOLS_COMMANDS_HPP

// Subcommand implementations for the ptomo driver. Kept free of the argument
// parser so the tests can call them directly.

#include <ptomo/ptomo.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ptomo::cli {

struct RunConfig {
    std::string in, out, data, truth, history, heatmaps;

    int n = 0; // 0: 64 for phantoms, the data's sample count otherwise
    double half_width = 1.0;
    double r0 = 0.8;
    double r1 = 0.95;

    int angles = 180;
    int samples = 0; // 0: same as n (or the field's size)

    double step = 0.0;
    std::string forward = "rk4";
    int terms = 12;

    int max_iters = 10;
    double stop_tol = 1e-4;
    double sigma = 4.0;
    int order = 0;

    double scale = 1.0;
    std::vector<std::string> bumps;
    std::vector<int> bump_lines; // config line per bump, 0 if given as a flag
    std::string amplitudes = "imaginary";

    unsigned seed = 1;
    int threads = 0;
    bool quick = false;
    bool inject_fault = false;

    void validate() const
    {
        require(n == 0 || n >= 2, "n must be at least 2");
        require(half_width > 0.0, "half_width must be positive");
        require(r0 > 0.0 && r0 < r1 && r1 <= half_width, "need 0 < r0 < r1 <= half_width");
        require(angles > 0 && samples >= 0 && terms > 0 && max_iters > 0, "counts must be positive");
        require(forward == "rk4" || forward == "neumann", "forward must be rk4 or neumann");
        require(amplitudes == "imaginary" || amplitudes == "real", "amplitudes must be imaginary or real");
        require(order == 0 || order == 1, "order must be 0 or 1");
        require(step >= 0.0, "step must be non-negative");
    }
};

/// One `key = value` line of a config file.
struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

/// Flat key = value text: '#' starts a comment, blank lines are skipped,
/// dashes and underscores in keys are interchangeable. Keys may repeat
/// (bump lines accumulate).
inline std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& name)
{
    std::vector<ConfigEntry> out;
    std::string raw;
    int line = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw InvalidParameter(name + ":" + std::to_string(line) + ": expected 'key = value'");
        ConfigEntry e{trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line};
        if (e.key.empty())
            throw InvalidParameter(name + ":" + std::to_string(line) + ": empty key");
        for (auto& c : e.key)
            if (c == '_')
                c = '-';
        if (e.value.size() >= 2 && e.value.front() == '"' && e.value.back() == '"')
            e.value = e.value.substr(1, e.value.size() - 2);
        out.push_back(e);
    }
    return out;
}

inline std::vector<ConfigEntry> load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

/// "cx,cy,cz,radius,a11,a22,a33,a12,a13,a23"; amplitudes are multiplied by i
/// for imaginary phantoms.
inline Bump parse_bump(const std::string& text, bool imaginary, const std::string& where)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw InvalidParameter(where + ": '" + item + "' is not a number");
        }
    }
    if (v.size() != 10)
        throw InvalidParameter(where + ": expected 10 comma-separated numbers (center, radius, 6 amplitudes), got " +
                               std::to_string(v.size()));
    Bump b;
    b.center = Vec3(v[0], v[1], v[2]);
    b.radius = v[3];
    const cplx unit = imaginary ? cplx(0.0, 1.0) : cplx(1.0, 0.0);
    for (std::size_t k = 0; k < 6; ++k)
        b.amplitude.c[k] = unit * v[4 + k];
    return b;
}

inline std::string bump_location(const RunConfig& cfg, std::size_t i)
{
    const int line = i < cfg.bump_lines.size() ? cfg.bump_lines[i] : 0;
    return line > 0 ? "bump " + std::to_string(i) + " (config line " + std::to_string(line) + ")"
                    : "bump " + std::to_string(i);
}

/// The configured phantom, unscaled. No bumps selects the standard phantom.
inline BumpPhantom make_phantom(const RunConfig& cfg)
{
    if (cfg.bumps.empty())
        return standard_phantom(cfg.r0);
    std::vector<Bump> bumps;
    for (std::size_t i = 0; i < cfg.bumps.size(); ++i) {
        Bump b = parse_bump(cfg.bumps[i], cfg.amplitudes == "imaginary", bump_location(cfg, i));
        if (b.radius <= 0.0)
            throw InvalidParameter(bump_location(cfg, i) + ": radius must be positive");
        if (b.center.norm() + b.radius > cfg.r0 + 1e-12)
            throw InvalidParameter(bump_location(cfg, i) + ": ball leaks outside the support radius r0 = " +
                                   io::format_double(cfg.r0));
        bumps.push_back(b);
    }
    return BumpPhantom(bumps, cfg.r0);
}

inline ViewSet make_views(const RunConfig& cfg, int field_size, double half_width)
{
    return standard_views(cfg.angles, cfg.samples > 0 ? cfg.samples : field_size, half_width);
}

inline ReconConfig recon_config(const RunConfig& cfg)
{
    ReconConfig rc;
    rc.grid_n = cfg.n;
    rc.max_iters = cfg.max_iters;
    rc.stop_tol = cfg.stop_tol;
    rc.step = cfg.step;
    rc.sigma = cfg.sigma;
    rc.forward = cfg.forward == "neumann" ? ForwardKind::Neumann : ForwardKind::RK4;
    rc.neumann_terms = cfg.terms;
    return rc;
}

inline std::string or_default(const std::string& s, const std::string& fallback) { return s.empty() ? fallback : s; }

// ---------------------------------------------------------------------------

inline int cmd_phantom(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    const int n = cfg.n > 0 ? cfg.n : 64;
    const BumpPhantom ph = make_phantom(cfg);
    TensorField f = ph.rasterize(n, cfg.half_width);
    f *= cplx(cfg.scale);

    bool support_ok = true;
    for (std::size_t i = 0; i < f.voxel_count(); ++i) {
        const auto& vol = f.component(0);
        const Vec3 x = vol.position(static_cast<int>(i % f.size()), static_cast<int>((i / f.size()) % f.size()),
                                    static_cast<int>(i / (static_cast<std::size_t>(f.size()) * f.size())));
        if (x.norm() >= cfg.r0 && !(f.voxel(i) == Sym3{}))
            support_ok = false;
    }
    const auto peaks = peak_magnitudes(f);
    log << "phantom: n=" << n << " half_width=" << cfg.half_width << " r0=" << cfg.r0
        << " bumps=" << (cfg.bumps.empty() ? std::string("standard") : std::to_string(cfg.bumps.size())) << '\n';
    for (std::size_t k = 0; k < 6; ++k)
        log << "  peak " << tensor_component_names[k] << " = " << io::format_double(peaks[k]) << '\n';
    log << "support check: " << (support_ok ? "ok" : "FAILED") << '\n';
    const std::string out = or_default(cfg.out, "phantom.ptvol");
    io::save(out, f);
    log << "wrote " << out << '\n';
    return support_ok ? 0 : 1;
}

inline int cmd_forward(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    require(!cfg.in.empty(), "forward: --in <field.ptvol> is required");
    const TensorField f = io::load_tensor(cfg.in);
    const ViewSet views = make_views(cfg, f.size(), f.half_width());
    ReconConfig rc = recon_config(cfg);
    const Sinogram s = forward_data(f, views, rc);
    double dev = 0.0;
    for (const auto& v : s.data())
        dev = std::max(dev, std::abs(v - 1.0));
    log << "forward (" << cfg.forward << (cfg.forward == "neumann" ? ", terms " + std::to_string(cfg.terms) : "")
        << "): K=" << views.angles_per_view << " M=" << views.detector_count << '\n';
    log << "sup|S11 - 1| = " << io::format_double(dev) << '\n';
    const std::string out = or_default(cfg.out, "s11.ptsin");
    io::save(out, s);
    log << "wrote " << out << '\n';
    return 0;
}

inline int cmd_transverse(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    require(!cfg.in.empty(), "transverse: --in <field.ptvol> is required");
    const TensorField f = io::load_tensor(cfg.in);
    const ViewSet views = make_views(cfg, f.size(), f.half_width());
    const LambdaData J = transverse_transform(f, views, cfg.step);
    log << "transverse: sup|Jf| = " << io::format_double(J.sinogram().sup_norm()) << '\n';
    const std::string out = or_default(cfg.out, "jf.ptlam");
    io::save(out, J);
    log << "wrote " << out << '\n';
    return 0;
}

inline LambdaData load_lambda_any(const std::string& path)
{
    const std::string magic = io::peek_magic(path);
    if (magic == "PTLAM1")
        return io::load_lambda(path);
    if (magic == "PTSIN1") {
        Sinogram s = io::load_sinogram(path);
        if (s.kind() == SinogramKind::S11) {
            // S11 data: the residual S11 - 1
            for (auto& v : s.data())
                v -= 1.0;
            s.set_kind(SinogramKind::Residual);
        }
        return LambdaData(std::move(s));
    }
    throw FormatError(path + ": expected PTLAM1 or PTSIN1 data, found '" + magic + "'");
}

inline int cmd_invert_j(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    require(!cfg.in.empty(), "invert-j: --in <data.ptlam> is required");
    const LambdaData data = load_lambda_any(cfg.in);
    const int n = cfg.n > 0 ? cfg.n : data.views().detector_count;
    const TensorField f = invert_lambda(data, n);
    const auto peaks = peak_magnitudes(f);
    log << "invert-j: n=" << n << '\n';
    for (std::size_t k = 0; k < 6; ++k)
        log << "  peak " << tensor_component_names[k] << " = " << io::format_double(peaks[k]) << '\n';
    const std::string out = or_default(cfg.out, "jinv.ptvol");
    io::save(out, f);
    log << "wrote " << out << '\n';
    return 0;
}

inline void write_heatmaps(const std::string& dir, const TensorField& recon, const TensorField* truth)
{
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < 6; ++k) {
        const std::string name = tensor_component_names[k];
        const auto r = io::mid_plane_magnitude(recon.component(k));
        const int n = recon.size();
        double hi = *std::max_element(r.begin(), r.end());
        if (truth != nullptr) {
            const auto t = io::mid_plane_magnitude(truth->component(k));
            hi = std::max(hi, *std::max_element(t.begin(), t.end()));
            io::write_heatmap(dir + "/truth_" + name + ".ppm", n, n, t, 0.0, hi);
            ScalarVolume diff = truth->component(k);
            diff -= recon.component(k);
            const auto d = io::mid_plane_magnitude(diff);
            io::write_heatmap(dir + "/diff_" + name + ".ppm", n, n, d, 0.0, *std::max_element(d.begin(), d.end()));
        }
        io::write_heatmap(dir + "/recon_" + name + ".ppm", n, n, r, 0.0, hi);
    }
}

inline int cmd_reconstruct(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    require(!cfg.data.empty(), "reconstruct: --data <s11.ptsin> is required");
    const Sinogram s11 = io::load_sinogram(cfg.data);
    std::optional<TensorField> truth;
    if (!cfg.truth.empty())
        truth = io::load_tensor(cfg.truth);
    const Cutoff chi = make_cutoff(cfg.r0, cfg.r1);
    ReconConfig rc = recon_config(cfg);
    if (cfg.n == 0)
        rc.grid_n = truth ? truth->size() : s11.views().detector_count;
    require(!truth || (truth->size() == rc.grid_n && truth->half_width() == s11.views().half_width),
            "reconstruct: truth field must live on the reconstruction grid");
    const ReconState st = run(s11, chi, rc, truth);

    const std::string out = or_default(cfg.out, "recon.ptvol");
    io::save(out, st.iterate);
    const std::string hist = or_default(cfg.history, out + ".history.csv");
    {
        std::ofstream h(hist);
        if (!h)
            throw FormatError("cannot write " + hist);
        io::write_history_csv(h, st.history);
    }
    if (!cfg.heatmaps.empty())
        write_heatmaps(cfg.heatmaps, st.iterate, truth ? &*truth : nullptr);

    io::write_history_csv(log, st.history);
    log << "wrote " << out << " and " << hist << '\n';
    if (st.diverged) {
        log << "DIVERGED: updates grew on consecutive iterations\n";
        return 3;
    }
    log << (st.converged ? "converged" : "stopped at max_iters") << " after " << st.n() << " iterates\n";
    return 0;
}

inline int cmd_norms(const RunConfig& cfg, std::ostream& log)
{
    cfg.validate();
    require(!cfg.in.empty(), "norms: --in <file> is required");
    const std::string magic = io::peek_magic(cfg.in);
    if (magic == "PTVOL1") {
        const TensorField f = io::load_tensor(cfg.in);
        log << "voxel sup = " << io::format_double(sup_norm(f)) << '\n';
        log << "hat_c(sigma=" << cfg.sigma << ", order=" << cfg.order
            << ") = " << io::format_double(hat_c_sigma(f, cfg.sigma, cfg.order)) << '\n';
        return 0;
    }
    if (magic == "PTSIN1" || magic == "PTLAM1") {
        const Sinogram s = magic == "PTSIN1" ? io::load_sinogram(cfg.in) : io::load_lambda(cfg.in).sinogram();
        log << "sample sup = " << io::format_double(s.sup_norm()) << '\n';
        log << "lambda_norm(sigma=" << cfg.sigma << ") = " << io::format_double(lambda_norm(s, cfg.sigma)) << '\n';
        return 0;
    }
    throw FormatError(cfg.in + ": unknown file type '" + magic + "'");
}

// --- selftest ---------------------------------------------------------------

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Line integral of the planar radial bump A * psi(|x - c| / rho) along the
/// line {x . theta_perp = s}: psi depends only on the distance to the centre.
inline double radial_bump_line_integral(double s_rel, double rho)
{
    const double s = std::abs(s_rel);
    if (s >= rho)
        return 0.0;
    const double T = std::sqrt(rho * rho - s * s);
    const int m = 2000;
    double sum = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double t = -T + 2.0 * T * i / m;
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * Bump::profile(std::sqrt(s * s + t * t) / rho);
    }
    return sum * (2.0 * T / m) / 3.0;
}

using InverseHook = std::function<TensorField(const LambdaData&, int)>;

inline BumpPhantom balanced_phantom(double scale = 1.0)
{
    const cplx i(0.0, 1.0);
    Bump a;
    a.center = Vec3(0.15, -0.1, 0.05);
    a.radius = 0.55;
    a.amplitude.c = {1.0 * i, 0.7 * i, 0.85 * i, 0.6 * i, -0.55 * i, 0.65 * i};
    Bump b;
    b.center = Vec3(-0.25, 0.2, -0.15);
    b.radius = 0.4;
    b.amplitude.c = {-0.6 * i, 0.9 * i, 0.5 * i, -0.5 * i, 0.6 * i, 0.55 * i};
    return BumpPhantom({a, b}, 0.8).scaled(scale);
}

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline std::vector<SuiteResult> run_selftest(const RunConfig& cfg, const InverseHook& inverse)
{
    std::vector<SuiteResult> results;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int n = cfg.quick ? 16 : 32;
    const int K = cfg.quick ? 32 : 90;

    { // projector idempotence and transversality
        double worst = 0.0;
        for (int t = 0; t < 200; ++t) {
            const Direction theta(Vec3(uni(rng), uni(rng), uni(rng) + 2.0).normalized());
            const CVec3 z(cplx(uni(rng), uni(rng)), cplx(uni(rng), uni(rng)), cplx(uni(rng), uni(rng)));
            const CVec3 p = project_transverse(theta, z);
            const CVec3 pp = project_transverse(theta, p);
            worst = std::max({worst, (pp - p).cwiseAbs().maxCoeff(), std::abs(theta.vec().cast<cplx>().dot(p))});
        }
        results.push_back({"projector", worst <= 1e-12, "max defect " + fmt(worst) + " (limit 1e-12)"});
    }

    const TensorField phys = standard_phantom().rasterize(n, 1.0);
    const TensorField f = phys * cplx(0.05 / sup_norm(phys));
    const ViewSet views = standard_views(K, n, 1.0);

    { // unitarity of S for a purely imaginary symmetric field
        const auto S = forward_scattering(f, views, default_step(f));
        double worst = 0.0;
        for (const auto& m : S)
            worst = std::max(worst, (m * m.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff());
        results.push_back({"unitarity", worst <= 1e-7, "max |S S^+ - Id| " + fmt(worst) + " (limit 1e-7)"});
    }

    { // multiplicativity: one segment equals the product of its halves
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const ViewFrame frame = ViewFrame::at_angle(views.omegas[static_cast<std::size_t>(t % 6)], 0.3 * t);
            const Vec3 base = 0.3 * uni(rng) * frame.theta_perp().vec() + 0.3 * uni(rng) * frame.omega().vec();
            const double s0 = -0.9, s1 = 0.9, sm = 0.37 * uni(rng);
            const double h = 0.25 * f.spacing();
            const Mat2 whole = solve_segment(f, frame, base, s0, s1, h);
            const Mat2 parts = solve_segment(f, frame, base, sm, s1, h) * solve_segment(f, frame, base, s0, sm, h);
            worst = std::max(worst, (whole - parts).cwiseAbs().maxCoeff());
        }
        results.push_back({"multiplicativity", worst <= 1e-8, "max defect " + fmt(worst) + " (limit 1e-8)"});
    }

    if (!cfg.quick) { // J round trip plus consistency of the assembly with the per-view inversions
        const TensorField g = balanced_phantom().rasterize(n, 1.0);
        const LambdaData J = transverse_transform(g, views);
        const TensorField r = inverse(J, n);
        double worst = 0.0;
        for (std::size_t k = 0; k < 6; ++k) {
            ScalarVolume d = g.component(k);
            d -= r.component(k);
            worst = std::max(worst, l2_norm(d) / l2_norm(g.component(k)));
        }
        std::array<ScalarVolume, 6> u;
        for (std::size_t v = 0; v < 6; ++v)
            u[v] = invert_volume(J.sinogram(), v, n);
        double assembly = 0.0;
        for (std::size_t i = 0; i < r.voxel_count(); ++i) {
            const cplx f11 = u[0].data()[i], f22 = u[1].data()[i], f33 = u[2].data()[i];
            const std::array<cplx, 6> expect{f11, f22, f33, u[3].data()[i] - 0.5 * (f11 + f22),
                                             u[4].data()[i] - 0.5 * (f11 + f33), u[5].data()[i] - 0.5 * (f22 + f33)};
            for (std::size_t k = 0; k < 6; ++k)
                assembly = std::max(assembly, std::abs(r.component(k).data()[i] - expect[k]));
        }
        assembly /= sup_norm(g);
        results.push_back({"j-roundtrip", worst <= 0.08 && assembly <= 1e-12,
                           "worst component rel L2 " + fmt(worst) + " (limit 8e-2), assembly defect " + fmt(assembly) +
                               " (limit 1e-12)"});
    }

    { // FBP of an oracle sinogram of a radial bump
        const int M = 64, KK = 180;
        const double d = 2.0 / M, rho = 0.6;
        const Vec3 c(0.1, -0.05, 0.0);
        SliceSinogram g = SliceSinogram::zeros(KK, M, d);
        for (int k = 0; k < KK; ++k)
            for (int l = 0; l < M; ++l) {
                const double phi = g.angles[static_cast<std::size_t>(k)];
                const double cs = -c[0] * std::sin(phi) + c[1] * std::cos(phi);
                g(k, l) = radial_bump_line_integral(g.position(l) - cs, rho);
            }
        const SliceImage img = invert_slice(g);
        double num = 0.0, den = 0.0;
        for (int iv = 0; iv < M; ++iv)
            for (int iu = 0; iu < M; ++iu) {
                const double r = std::hypot(img.position(iu) - c[0], img.position(iv) - c[1]);
                const double truth = Bump::profile(r / rho);
                num += std::norm(img(iu, iv) - truth);
                den += truth * truth;
            }
        const double rel = std::sqrt(num / den);
        results.push_back({"fbp-roundtrip", rel <= 0.02, "rel L2 " + fmt(rel) + " (limit 2e-2)"});
    }

    { // norm homogeneity and triangle inequality
        const ScalarVolume a = f.component(0), b = f.component(3);
        const double sigma = cfg.sigma;
        const cplx c(-2.5, 1.5);
        ScalarVolume ca = a;
        ca *= c;
        ScalarVolume ab = a;
        ab += b;
        const double na = hat_linf_sigma(a, sigma), nb = hat_linf_sigma(b, sigma);
        const double hom = std::abs(hat_linf_sigma(ca, sigma) - std::abs(c) * na) / (std::abs(c) * na);
        const double tri = hat_linf_sigma(ab, sigma) - (na + nb);
        results.push_back({"norm-homogeneity", hom <= 1e-9 && tri <= 1e-9 * (na + nb),
                           "homogeneity defect " + fmt(hom) + ", triangle excess " + fmt(tri)});
    }
    return results;
}

/// 1% perturbation of the inverse, used to check that the suites notice.
inline TensorField perturbed_inverse(const LambdaData& data, int n)
{
    TensorField f = invert_lambda(data, n);
    f *= cplx(1.01);
    return f;
}

inline int cmd_selftest(const RunConfig& cfg, std::ostream& log)
{
    const auto start = std::chrono::steady_clock::now();
    InverseHook inverse = [](const LambdaData& d, int n) { return invert_lambda(d, n); };
    if (cfg.inject_fault) {
        inverse = perturbed_inverse;
        log << "fault injection: inverse scaled by 1.01\n";
    }
    RunConfig c = cfg;
    if (c.inject_fault)
        c.quick = false; // the round-trip suite must run
    const auto results = run_selftest(c, inverse);
    bool ok = true;
    for (const auto& r : results) {
        log << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        ok = ok && r.pass;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log << (ok ? "selftest passed" : "selftest FAILED") << " in " << fmt(secs) << " s\n";
    return ok ? 0 : 1;
}

} // namespace ptomo::cli

#endif // PTOMO_TOOLS_COMMANDS_HPP
