// monopole_cli: field export, verification, spectral scans, rational maps and
// Nahm data tools. Exit codes: 0 ok, 2 validation or threshold failure,
// 3 numeric failure, 4 I/O failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "monopole/monopole.hpp"

namespace fs = std::filesystem;
using namespace monopole;
namespace mio = monopole::io;
using json = mio::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

// ---------------------------------------------------------------------------
// Shared flags and run configuration

struct Flags {
    std::string config;
    std::string grid;
    double tol = 0.0;
    double tmax = 0.0;
    int quad_order = 0;
    std::uint64_t seed = 42;
    int threads = 0;
    std::string out = ".";
    std::string format = "json";
    CLI::Option* o_tol = nullptr;
    CLI::Option* o_tmax = nullptr;
    CLI::Option* o_quad = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_threads = nullptr;
};

Vec3 parse_vec(const std::string& s, const char* what) {
    if (s.empty()) return Vec3::Zero();
    return mio::parse_triple(s, what);
}

/// "L,n": the cube [-L, L]^3 about `centre` with n points per axis.
GridSpec parse_grid_flag(const std::string& s, const Vec3& centre) {
    std::vector<double> v;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ValidationError("bad-grid", "--grid expects L,n; got '" + s + "'");
        }
    }
    if (v.size() != 2 || !(v[0] > 0.0) || v[1] != std::floor(v[1]) || v[1] < 2)
        throw ValidationError("bad-grid", "--grid expects L,n with L > 0 and integer n >= 2");
    return GridSpec::centred(centre, v[0], static_cast<int>(v[1]));
}

mio::RunConfig resolve(const Flags& f, const Vec3& grid_centre = Vec3::Zero()) {
    mio::RunConfig c = f.config.empty() ? mio::RunConfig{} : mio::load_run_config(f.config);
    if (!f.grid.empty()) c.grid = parse_grid_flag(f.grid, grid_centre);
    if (f.o_tol->count()) c.ode_tol = f.tol;
    if (f.o_tmax->count()) c.t_max = f.tmax;
    if (f.o_quad->count()) c.quad_order = f.quad_order;
    if (f.o_seed->count()) c.seed = f.seed;
    if (f.o_threads->count()) c.thread_cap = f.threads;
    c.validate();
    return c;
}

ScatteringOptions scattering_options(const mio::RunConfig& c) {
    ScatteringOptions so;
    so.t_max = c.t_max;
    so.ode.abs_tol = so.ode.rel_tol = c.ode_tol;
    so.threads = c.thread_cap;
    return so;
}

json grid_json(const GridSpec& g) {
    return json{{"origin", mio::to_json(g.origin)},
                {"spacing", mio::to_json(g.spacing)},
                {"counts", {g.counts[0], g.counts[1], g.counts[2]}}};
}

// ---------------------------------------------------------------------------
// Output

struct Output {
    fs::path dir;

    explicit Output(const std::string& d) : dir(d) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir)) throw IoError("io-error", "cannot create output directory " + d);
    }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    void json_file(const std::string& name, const json& j) const {
        mio::write_json(path(name), j);
        std::cout << path(name) << "\n";
    }

    void text_file(const std::string& name, const std::string& text) const {
        mio::write_file(path(name), text);
        std::cout << path(name) << "\n";
    }

    void volume_file(const std::string& name, const mio::Volume& v) const {
        std::ostringstream ss;
        mio::write_volume(ss, v);
        text_file(name, ss.str());
    }

    /// Rows of numbers as CSV with a header, or as a JSON array of objects.
    void table(const std::string& stem, const std::string& format, const std::vector<std::string>& cols,
               const std::vector<std::vector<double>>& rows) const {
        if (format == "csv") {
            std::string text;
            for (std::size_t c = 0; c < cols.size(); ++c) text += (c ? "," : "") + cols[c];
            text += "\n";
            for (const auto& r : rows) {
                for (std::size_t c = 0; c < r.size(); ++c) text += (c ? "," : "") + mio::fmt(r[c]);
                text += "\n";
            }
            text_file(stem + ".csv", text);
        } else {
            json a = json::array();
            for (const auto& r : rows) {
                json o;
                for (std::size_t c = 0; c < cols.size(); ++c) o[cols[c]] = r[c];
                a.push_back(o);
            }
            json_file(stem + ".json", a);
        }
    }
};

double max_finite(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, x);
    return m;
}

std::vector<Vec3> ball_points(std::mt19937_64& rng, const Vec3& c, double R, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts;
    while (static_cast<int>(pts.size()) < n) {
        const Vec3 v(u(rng), u(rng), u(rng));
        if (v.norm() <= 1.0) pts.push_back(c + R * v);
    }
    return pts;
}

std::vector<GaugeTransform> random_gauges(std::mt19937_64& rng, const Vec3& c, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto vec = [&](double s) -> Vec3 { return Vec3(u(rng), u(rng), u(rng)) * s; };
    std::vector<GaugeTransform> out;
    for (int i = 0; i < n; ++i) {
        const Su2Element X = Su2Element::from_components(vec(1.0));
        const Vec3 centre = c + vec(1.0);
        const double amp = 1.0 + 0.5 * u(rng), width = 1.5 + 0.5 * u(rng);
        const Su2Group g = exp(Su2Element::from_components(vec(3.0)));
        out.push_back(GaugeTransform::bump(X, centre, amp, width).compose(GaugeTransform::constant(g)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// bps

struct BpsArgs {
    std::string centre;
    int profile_points = 101;
    double profile_rmax = 5.0;
};

int cmd_bps(const Flags& f, const BpsArgs& a) {
    const Vec3 p = parse_vec(a.centre, "--centre");
    const auto rc = resolve(f, p);
    if (a.profile_points < 2 || !(a.profile_rmax > 0.0))
        throw ValidationError("bad-profile", "profile needs >= 2 points and rmax > 0");
    const Output out(f.out);
    const auto cfg = bps_config(p);
    const auto lap = EnergyNormalization::laplacian;
    const auto e = sample_grid<double>(
        rc.grid, [&](const Vec3& x) { return energy_density(cfg, x, rc.fd_step, lap); }, rc.thread_cap);
    const auto phi = sample_grid<double>(
        rc.grid, [&](const Vec3& x) { return norm(cfg.higgs(x)); }, rc.thread_cap);
    out.volume_file("bps_energy_density.vol", mio::scalar_volume(rc.grid, "energy_density", "dimensionless", e));
    out.volume_file("bps_higgs_norm.vol", mio::scalar_volume(rc.grid, "higgs_norm", "dimensionless", phi));

    std::vector<std::vector<double>> rows;
    for (int i = 0; i < a.profile_points; ++i) {
        const double r = a.profile_rmax * i / (a.profile_points - 1);
        const Vec3 x = p + Vec3(0.0, 0.0, r);
        rows.push_back({r, energy_density(cfg, x, rc.fd_step, lap), bps_energy_density_closed(r), norm(cfg.higgs(x))});
    }
    out.table("bps_profile", f.format, {"r", "energy_density", "energy_density_closed", "higgs_norm"}, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
    std::string source = "bps";
    std::string input;
    std::string centre;
    int points = 20;
    double threshold = -1.0;
    bool exact = false;
};

json gauge_checks(const FieldConfiguration& cfg, const std::vector<Vec3>& pts, std::mt19937_64& rng,
                  const Vec3& c, double h) {
    json checks = json::array();
    for (const auto& gt : random_gauges(rng, c, 3)) {
        const auto gcfg = gauge_apply(cfg, gt);
        double d_phi = 0.0, d_e = 0.0, d_res = 0.0;
        for (const Vec3& x : pts) {
            d_phi = std::max(d_phi, std::abs(norm(cfg.higgs(x)) - norm(gcfg.higgs(x))));
            d_e = std::max(d_e, std::abs(energy_density(cfg, x, h) - energy_density(gcfg, x, h)));
            d_res = std::max(d_res, std::abs(bogomolny_residual(cfg, x, h) - bogomolny_residual(gcfg, x, h)));
        }
        checks.push_back(json{{"higgs_norm", d_phi}, {"energy_density", d_e}, {"residual", d_res}});
    }
    return checks;
}

int cmd_verify(const Flags& f, const VerifyArgs& a) {
    const Vec3 p = parse_vec(a.centre, "--centre");
    const auto rc = resolve(f, p);
    if (a.points < 1) throw ValidationError("bad-points", "--points must be >= 1");
    const Output out(f.out);
    std::mt19937_64 rng(rc.seed);
    const double h = rc.fd_step;
    const auto lap = EnergyNormalization::laplacian;

    json rep;
    rep["source"] = a.source;
    rep["seed"] = rc.seed;
    rep["fd_step"] = h;
    double residual = 0.0, threshold = a.threshold;

    if (a.source == "bps") {
        const auto cfg = bps_config(p);
        const auto pts = ball_points(rng, p, 5.0, a.points);
        double e_err = 0.0;
        for (const Vec3& x : pts) {
            residual = std::max(residual, bogomolny_residual(cfg, x));
            const double r = (x - p).norm();
            if (r >= 0.1) e_err = std::max(e_err, std::abs(energy_density(cfg, x, h, lap) - energy_density_laplacian(cfg, x, h)));
        }
        const auto fd = cfg.without_derivatives();
        double r1 = 0.0, r2 = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(pts.size(), 10); ++i) {
            r1 = std::max(r1, bogomolny_residual(fd, pts[i], 1e-2));
            r2 = std::max(r2, bogomolny_residual(fd, pts[i], 5e-3));
        }
        if (threshold < 0) threshold = 1e-10;
        rep["bogomolny"] = json{{"method", "analytic"}, {"points", pts.size()}, {"max_residual", residual}};
        rep["convergence"] = json{{"h", {1e-2, 5e-3}}, {"max_residual", {r1, r2}}, {"order", std::log2(r1 / r2)}};
        rep["energy"] = json{{"e0", energy_density(cfg, p, h, lap)},
                             {"e0_closed", bps_energy_density_closed(0.0)},
                             {"max_density_vs_laplacian", e_err}};
        rep["gauge_invariance"] = gauge_checks(cfg, std::vector<Vec3>(pts.begin(), pts.begin() + std::min<std::size_t>(pts.size(), 5)), rng, p, 1e-4);
    } else if (a.source == "nahm" || a.source == "torus") {
        const bool torus = a.source == "torus";
        const NahmData data = torus ? nahm_torus() : nahm_point(p);
        KernelOptions ko;
        ko.quad_order = rc.quad_order;
        ko.ode_tol = std::min(rc.ode_tol, 1e-10);
        ko.exact_constant = a.exact;
        const auto cfg = nahm_field(data, ko, h);
        const Vec3 c = torus ? Vec3::Zero() : p;
        const auto pts = ball_points(rng, c, 3.0, a.points);
        std::vector<double> res(pts.size()), phi_err(pts.size(), 0.0), e_err(pts.size(), 0.0);
        parallel_for(
            pts.size(),
            [&](std::size_t n) {
                res[n] = bogomolny_residual(cfg, pts[n], h);
                const double r = (pts[n] - c).norm();
                if (!torus) phi_err[n] = std::abs(norm(cfg.higgs(pts[n])) - bps_higgs_norm(r));
                if (r >= 0.1)
                    e_err[n] = std::abs(energy_density(cfg, pts[n], h, lap) - energy_density_laplacian(cfg, pts[n], 1e-2));
            },
            rc.thread_cap);
        residual = max_finite(res);
        double r1 = 0.0, r2 = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(pts.size(), 5); ++i) {
            r1 = std::max(r1, bogomolny_residual(nahm_field(data, ko, 4e-3), pts[i], 4e-3));
            r2 = std::max(r2, bogomolny_residual(nahm_field(data, ko, 2e-3), pts[i], 2e-3));
        }
        if (threshold < 0) threshold = torus ? 1e-5 : 5e-6;
        rep["k"] = data.k();
        rep["bogomolny"] = json{{"method", "finite-difference"}, {"points", pts.size()}, {"max_residual", residual}};
        rep["convergence"] = json{{"h", {4e-3, 2e-3}}, {"max_residual", {r1, r2}}, {"order", std::log2(r1 / r2)}};
        rep["energy"] = json{{"max_density_vs_laplacian", max_finite(e_err)}};
        rep["higgs_norm_vs_closed_form"] = torus ? json(nullptr) : json(max_finite(phi_err));
        rep["gauge_invariance"] = gauge_checks(cfg, std::vector<Vec3>(pts.begin(), pts.begin() + std::min<std::size_t>(pts.size(), 3)), rng, c, h);
    } else if (a.source == "volume") {
        if (a.input.empty()) throw ValidationError("missing-input", "--source volume needs --input");
        const auto vol = mio::read_volume(a.input);
        const auto vals = mio::configuration_from_volume(vol);
        const auto res = grid_bogomolny_residuals(vol.grid, vals);
        residual = max_finite(res);
        if (threshold < 0) threshold = 1e-2;
        const auto cfg = sampled_field(vol.grid, vals, 1);
        // sample well inside so every interpolation stencil and FD step stays in the box
        const Vec3 lo = vol.grid.origin + 2.0 * vol.grid.spacing, hi = vol.grid.upper() - 2.0 * vol.grid.spacing;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<Vec3> pts;
        for (int n = 0; n < std::min(a.points, 5); ++n)
            pts.push_back(lo + Vec3(u(rng) * (hi - lo)[0], u(rng) * (hi - lo)[1], u(rng) * (hi - lo)[2]));
        std::size_t interior = 0;
        for (double x : res) interior += std::isfinite(x) ? 1 : 0;
        rep["input"] = a.input;
        rep["grid"] = grid_json(vol.grid);
        rep["bogomolny"] = json{{"method", "grid-difference"}, {"points", interior}, {"max_residual", residual}};
        rep["convergence"] = nullptr;
        rep["energy"] = nullptr;
        rep["gauge_invariance"] = gauge_checks(cfg, pts, rng, 0.5 * (lo + hi), h);
    } else {
        throw ValidationError("bad-source", "unknown source '" + a.source + "' (bps, nahm, torus, volume)");
    }
    const bool pass = residual <= threshold;
    rep["bogomolny"]["threshold"] = threshold;
    rep["pass"] = pass;
    out.json_file("verify_report.json", rep);
    if (!pass) {
        std::cerr << "verify: max residual " << residual << " exceeds threshold " << threshold << "\n";
        return kExitValidation;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// scan

struct ScanArgs {
    std::string source = "bps";
    std::string centre;
    int k = -1;
    int zetas = 0;
    double radius = 0.0;
    int root_grid = 0;
};

int cmd_scan(const Flags& f, const ScanArgs& a) {
    const Vec3 p = parse_vec(a.centre, "--centre");
    const auto rc = resolve(f, p);
    const Output out(f.out);
    std::optional<FieldConfiguration> cfg;
    RootSearchOptions ro;
    if (a.source == "bps") {
        cfg = bps_config(p);
    } else if (a.source == "vacuum") {
        cfg = vacuum();
    } else if (a.source == "nahm") {
        KernelOptions ko;
        ko.quad_order = rc.quad_order;
        ko.exact_constant = true;
        cfg = nahm_field(nahm_point(p), ko);
        ro.radius = 1.5;
        ro.grid = 9;
    } else {
        throw ValidationError("bad-source", "unknown source '" + a.source + "' (bps, nahm, vacuum)");
    }
    if (a.radius > 0.0) ro.radius = a.radius;
    if (a.root_grid > 0) ro.grid = a.root_grid;
    const int k = a.k >= 0 ? a.k : cfg->charge();
    if (k < 1) throw ValidationError("bad-charge", "k must be >= 1");
    const int nz = a.zetas > 0 ? a.zetas : 3 * (2 * k + 1);
    const auto zetas = disk_samples(nz);
    const auto fit = fit_spectral_curve(*cfg, k, zetas, ro, scattering_options(rc));
    const double defect = reality_defect(fit.poly);

    json roots = json::array();
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < zetas.size(); ++n) {
        roots.push_back(mio::to_json(fit.roots[n]));
        for (const cplx& eta : fit.roots[n]) rows.push_back({zetas[n].real(), zetas[n].imag(), eta.real(), eta.imag()});
    }
    json rep;
    rep["source"] = a.source;
    rep["k"] = k;
    rep["zetas"] = mio::to_json(zetas);
    rep["roots"] = roots;
    rep["curve"] = mio::to_json(fit.poly);
    rep["fit_residual"] = fit.residual;
    rep["reality_defect"] = defect;
    rep["centre"] = defect <= 1e-3 ? mio::to_json(centre_of(fit.poly)) : json(nullptr);
    out.json_file("scan.json", rep);
    out.table("scan_roots", f.format, {"zeta_re", "zeta_im", "eta_re", "eta_im"}, rows);
    if (defect > 1e-3) {
        std::cerr << "scan: reality defect " << defect << " above 1e-3\n";
        return kExitValidation;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// rmap

struct RmapArgs {
    std::string mode = "donaldson";
    std::string source = "bps";
    std::string centre;
    std::string base;
    int zetas = 16;
};

int cmd_rmap(const Flags& f, const RmapArgs& a) {
    const Vec3 p = parse_vec(a.centre, "--centre");
    const auto rc = resolve(f, p);
    const Output out(f.out);
    std::optional<FieldConfiguration> cfg;
    if (a.source == "bps")
        cfg = bps_config(p);
    else if (a.source == "vacuum")
        cfg = vacuum();
    else
        throw ValidationError("bad-source", "unknown source '" + a.source + "' (bps, vacuum)");
    const auto so = scattering_options(rc);
    json rep;
    rep["mode"] = a.mode;
    rep["source"] = a.source;
    if (a.mode == "donaldson") {
        DonaldsonOptions opt;
        opt.scattering = so;
        const auto res = donaldson_map(*cfg, cfg->charge(), {}, opt);
        rep["frame"] = json{{"n1", mio::to_json(res.frame.n1)}, {"n2", mio::to_json(res.frame.n2)}, {"n3", mio::to_json(res.frame.n3)}};
        rep["map"] = mio::to_json(res.map);
        rep["degree"] = res.map.degree();
        rep["poles"] = mio::to_json(res.poles);
        rep["a_at_poles"] = mio::to_json(res.a_at_poles);
        rep["pole_residuals"] = res.residuals;
        rep["basedness"] = json{{"inner_ring_mean_abs_a", res.inner_ring_a}, {"boundary_mean_abs_a", res.boundary_a}};
    } else if (a.mode == "jarvis") {
        const Vec3 b = parse_vec(a.base, "--base");
        JarvisOptions opt;
        opt.scattering = so;
        const auto res = jarvis_map(*cfg, b, disk_samples(a.zetas, 1.5), opt);
        rep["base"] = mio::to_json(b);
        rep["degree"] = res.degree;
        rep["residual"] = res.residual;
        rep["residual_by_degree"] = res.residual_by_degree;
        rep["map"] = mio::to_json(res.fit);
        rep["zetas"] = mio::to_json(res.zetas);
    } else {
        throw ValidationError("bad-mode", "--mode must be donaldson or jarvis");
    }
    out.json_file("rmap.json", rep);
    return 0;
}

// ---------------------------------------------------------------------------
// nahm

struct NahmArgs {
    std::string family = "pole";
    std::string input;
    std::string point;
    int k = 2;
    double z0 = -0.9, z1 = 0.9, z = std::numeric_limits<double>::quiet_NaN();
    int samples = 181;
    double scale = 0.2;
    bool exact = false;
};

std::vector<cplx> check_zetas() {
    return {cplx(0.0), cplx(0.5, 0.2), cplx(-0.3, 0.7), cplx(1.2, -0.4), cplx(-2.0, -1.0)};
}

int cmd_nahm_evolve(const Flags& f, const NahmArgs& a) {
    const auto rc = resolve(f);
    const Output out(f.out);
    std::optional<NahmData> exact;
    NahmTriple T0;
    if (a.family == "pole") {
        exact = nahm_pole_solution(su2_triple(a.k));
        T0 = exact->at(a.z0);
    } else if (a.family == "torus") {
        exact = nahm_torus();
        T0 = exact->at(a.z0);
    } else if (a.family == "random") {
        std::mt19937_64 rng(rc.seed);
        T0 = random_nahm_triple(a.k, a.scale, rng);
    } else {
        throw ValidationError("bad-family", "--family must be pole, torus or random");
    }
    EvolveOptions eo;
    eo.tol = rc.ode_tol;
    eo.n_samples = a.samples;
    const auto traj = evolve(T0, a.z0, a.z1, eo);
    json rep;
    rep["family"] = a.family;
    rep["k"] = traj.k();
    rep["seed"] = rc.seed;
    rep["z0"] = a.z0;
    rep["z1"] = a.z1;
    rep["ode_tol"] = rc.ode_tol;
    rep["char_poly_drift"] = conservation_report(traj, check_zetas());
    rep["nahm_residual"] = nahm_residual(traj);
    rep["anti_hermitian_defect"] = traj.anti_hermitian_defect();
    if (exact) {
        double err = 0.0;
        for (std::size_t n = 0; n < traj.z_samples().size(); ++n) {
            const auto Te = exact->at(traj.z_samples()[n]);
            for (int c = 0; c < 3; ++c) err = std::max(err, (traj.samples()[n][c] - Te[c]).cwiseAbs().maxCoeff());
        }
        rep["max_error_vs_exact"] = err;
    } else {
        rep["max_error_vs_exact"] = nullptr;
    }
    out.json_file("nahm_trajectory.json", mio::to_json(traj));
    out.json_file("nahm_conservation.json", rep);
    return 0;
}

NahmData load_nahm(const NahmArgs& a) {
    if (!a.input.empty()) return mio::nahm_from_json(mio::read_json(a.input));
    if (a.family == "torus") return nahm_torus();
    return nahm_point(parse_vec(a.point, "--point"));
}

int cmd_nahm_curve(const Flags& f, const NahmArgs& a) {
    resolve(f);
    const Output out(f.out);
    const NahmData data = load_nahm(a);
    const int k = data.k();
    const auto zetas = disk_samples(3 * (2 * k + 1));
    const auto fit = nahm_spectral_curve(data, zetas, a.z);
    const double defect = reality_defect(fit.poly);
    json rep;
    rep["k"] = k;
    rep["curve"] = mio::to_json(fit.poly);
    rep["fit_residual"] = fit.residual;
    rep["reality_defect"] = defect;
    rep["centre"] = defect <= 1e-3 ? mio::to_json(centre_of(fit.poly)) : json(nullptr);
    out.json_file("nahm_curve.json", rep);
    return 0;
}

int cmd_nahm_reconstruct(const Flags& f, const NahmArgs& a) {
    const auto rc = resolve(f);
    const Output out(f.out);
    const NahmData data = load_nahm(a);
    KernelOptions ko;
    ko.quad_order = rc.quad_order;
    ko.ode_tol = std::min(rc.ode_tol, 1e-10);
    ko.exact_constant = a.exact;
    const auto rg = reconstruct_grid(data, rc.grid, ko, 1e-4, rc.thread_cap);
    out.volume_file("nahm_fields.vol", mio::configuration_volume(rc.grid, rg.values));
    out.volume_file("nahm_higgs_norm.vol", mio::scalar_volume(rc.grid, "higgs_norm", "dimensionless", rg.higgs_norm));

    json rep;
    rep["k"] = data.k();
    rep["grid"] = grid_json(rc.grid);
    rep["grid_residual_max"] = max_finite(grid_bogomolny_residuals(rc.grid, rg.values, rg.valid));
    const bool point_data = a.input.empty() && a.family != "torus" && data.k() == 1 && data.is_constant();
    if (point_data) {
        const Vec3 p = parse_vec(a.point, "--point");
        double err = 0.0;
        for (std::size_t n = 0; n < rg.values.size(); ++n)
            if (rg.valid[n]) err = std::max(err, std::abs(rg.higgs_norm[n] - bps_higgs_norm((rc.grid.point(n) - p).norm())));
        rep["higgs_norm_vs_closed_form"] = err;
    } else {
        rep["higgs_norm_vs_closed_form"] = nullptr;
    }
    json fails = json::array();
    for (const auto& pf : rg.failures)
        fails.push_back(json{{"index", pf.index}, {"point", mio::to_json(rc.grid.point(pf.index))}, {"kind", pf.kind}});
    rep["failures"] = fails;
    out.json_file("nahm_reconstruct_report.json", rep);
    if (!rg.failures.empty()) {
        std::cerr << "reconstruct: " << rg.failures.size() << " grid points failed\n";
        return kExitNumeric;
    }
    return 0;
}

int exit_code(const Error& e) {
    switch (e.error_class()) {
        case ErrorClass::validation: return kExitValidation;
        case ErrorClass::numeric: return kExitNumeric;
        case ErrorClass::io: return kExitIo;
    }
    return kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monopole field, spectral data and Nahm transform tools"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "INI file with [grid], [tolerances], [run]");
    app.add_option("--grid", f.grid, "L,n: cube [-L,L]^3 (about the centre) with n points per axis");
    f.o_tol = app.add_option("--tol", f.tol, "ODE tolerance");
    f.o_tmax = app.add_option("--tmax", f.tmax, "scattering half-length t_max");
    f.o_quad = app.add_option("--quad-order", f.quad_order, "kernel quadrature order");
    f.o_seed = app.add_option("--seed", f.seed, "random seed (default 42)");
    f.o_threads = app.add_option("--threads", f.threads, "worker cap (else MONOPOLE_THREADS)");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--format", f.format, "table format")->check(CLI::IsMember({"json", "csv"}));
    app.fallthrough();

    BpsArgs ba;
    auto* bps = app.add_subcommand("bps", "BPS monopole volumes and radial profile");
    bps->add_option("--centre", ba.centre, "x,y,z");
    bps->add_option("--profile-points", ba.profile_points);
    bps->add_option("--profile-rmax", ba.profile_rmax);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Bogomolny residual, gauge and energy checks");
    verify->add_option("--source", va.source, "bps, nahm, torus or volume");
    verify->add_option("--input", va.input, "volume file for --source volume");
    verify->add_option("--centre", va.centre, "x,y,z");
    verify->add_option("--points", va.points);
    verify->add_option("--threshold", va.threshold, "max allowed residual");
    verify->add_flag("--exact", va.exact, "closed-form kernel frame for constant k=1 data");

    ScanArgs sa;
    auto* scan = app.add_subcommand("scan", "fit the spectral curve by locating spectral lines");
    scan->add_option("--source", sa.source, "bps, nahm or vacuum");
    scan->add_option("--centre", sa.centre, "x,y,z");
    scan->add_option("--k", sa.k);
    scan->add_option("--zetas", sa.zetas, "number of zeta samples");
    scan->add_option("--radius", sa.radius, "root search half-width");
    scan->add_option("--root-grid", sa.root_grid, "coarse samples per side");

    RmapArgs ra;
    auto* rmap = app.add_subcommand("rmap", "Donaldson or Jarvis rational map");
    rmap->add_option("--mode", ra.mode)->check(CLI::IsMember({"donaldson", "jarvis"}));
    rmap->add_option("--source", ra.source, "bps or vacuum");
    rmap->add_option("--centre", ra.centre, "x,y,z");
    rmap->add_option("--base", ra.base, "x,y,z (jarvis)");
    rmap->add_option("--zetas", ra.zetas);

    NahmArgs na;
    auto* nahm = app.add_subcommand("nahm", "Nahm data tools");
    nahm->require_subcommand(1);
    auto add_data = [&](CLI::App* s) {
        s->add_option("--input", na.input, "Nahm data JSON");
        s->add_option("--point", na.point, "x,y,z: k=1 constant data");
        s->add_option("--family", na.family, "pole, torus or random");
    };
    auto* evolve_cmd = nahm->add_subcommand("evolve", "integrate the Nahm equations");
    evolve_cmd->add_option("--family", na.family, "pole, torus or random");
    evolve_cmd->add_option("--k", na.k);
    evolve_cmd->add_option("--z0", na.z0);
    evolve_cmd->add_option("--z1", na.z1);
    evolve_cmd->add_option("--samples", na.samples);
    evolve_cmd->add_option("--scale", na.scale, "size of random data");
    auto* curve_cmd = nahm->add_subcommand("curve", "spectral curve of Nahm data");
    add_data(curve_cmd);
    curve_cmd->add_option("--z", na.z, "evaluation point");
    auto* recon_cmd = nahm->add_subcommand("reconstruct", "inverse Nahm transform on a grid");
    add_data(recon_cmd);
    recon_cmd->add_flag("--exact", na.exact, "closed-form kernel frame for constant k=1 data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (bps->parsed()) return cmd_bps(f, ba);
        if (verify->parsed()) return cmd_verify(f, va);
        if (scan->parsed()) return cmd_scan(f, sa);
        if (rmap->parsed()) return cmd_rmap(f, ra);
        if (evolve_cmd->parsed()) return cmd_nahm_evolve(f, na);
        if (curve_cmd->parsed()) {
            if (!curve_cmd->count("--family")) na.family = "point";
            return cmd_nahm_curve(f, na);
        }
        if (recon_cmd->parsed()) {
            if (!recon_cmd->count("--family")) na.family = "point";
            return cmd_nahm_reconstruct(f, na);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
