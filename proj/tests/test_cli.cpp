#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "monopole/bps.hpp"
#include "monopole/io.hpp"

namespace fs = std::filesystem;
using namespace monopole;
namespace mio = monopole::io;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("monopole_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + MONOPOLE_CLI_PATH + std::string(" ") + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string out_flag(const fs::path& d) { return "--out " + d.string(); }

mio::json read(const fs::path& p) { return mio::read_json(p.string()); }

Vec3 vec(const mio::json& j) { return mio::vec3_from_json(j); }

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string& header) {
    std::istringstream in(mio::read_file(p.string()));
    std::getline(in, header);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<double> r;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) r.push_back(std::stod(cell));
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST(CliBps, WritesVolumesAndProfile) {
    const auto d = fresh_dir("bps");
    ASSERT_EQ(run("--format csv " + out_flag(d) + " bps --centre 0.4,-0.2,0.6"), 0);
    const std::string vol = mio::read_file((d / "bps_energy_density.vol").string());
    EXPECT_EQ(vol.substr(0, vol.find('\n')),
              R"({"nx":21,"ny":21,"nz":21,"origin":[-2.0,-2.0,-2.0],"spacing":[0.2,0.2,0.2],"field":"energy_density","units":"dimensionless"})");

    std::string header;
    const auto rows = read_csv(d / "bps_profile.csv", header);
    EXPECT_EQ(header, "r,energy_density,energy_density_closed,higgs_norm");
    ASSERT_EQ(rows.size(), 101u);
    EXPECT_NEAR(rows[0][1], 2.0 / 3.0, 1e-6);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i][1], rows[i - 1][1]) << "r=" << rows[i][0];

    const auto v = mio::read_volume((d / "bps_energy_density.vol").string());
    std::size_t arg = 0;
    for (std::size_t n = 1; n < v.values.size(); ++n)
        if (v.values[n][0] > v.values[arg][0]) arg = n;
    EXPECT_LT((v.grid.point(arg) - Vec3(0.4, -0.2, 0.6)).norm(), 1e-12);
}

TEST(CliBps, JsonProfileFormat) {
    const auto d = fresh_dir("bps_json");
    ASSERT_EQ(run(out_flag(d) + " --grid 1,5 bps --profile-points 11"), 0);
    const auto prof = read(d / "bps_profile.json");
    ASSERT_EQ(prof.size(), 11u);
    EXPECT_NEAR(prof[0]["energy_density"].get<double>(), 2.0 / 3.0, 1e-6);
    EXPECT_NEAR(prof[10]["r"].get<double>(), 5.0, 1e-15);
}

TEST(CliBps, DeterministicAcrossThreadCounts) {
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b"), c = fresh_dir("det_c");
    ASSERT_EQ(run("--threads 1 --grid 2,9 " + out_flag(a) + " bps --centre 0.1,0.2,0.3"), 0);
    ASSERT_EQ(run("--threads 3 --grid 2,9 " + out_flag(b) + " bps --centre 0.1,0.2,0.3"), 0);
    ASSERT_EQ(run("--grid 2,9 " + out_flag(c) + " bps --centre 0.1,0.2,0.3", "MONOPOLE_THREADS=2"), 0);
    for (const char* f : {"bps_energy_density.vol", "bps_higgs_norm.vol", "bps_profile.json"}) {
        EXPECT_EQ(mio::read_file((a / f).string()), mio::read_file((b / f).string())) << f;
        EXPECT_EQ(mio::read_file((a / f).string()), mio::read_file((c / f).string())) << f;
    }
}

TEST(CliConfig, FileValuesAndFlagOverride) {
    const auto d = fresh_dir("config");
    const auto ini = d / "run.ini";
    mio::write_file(ini.string(), "[grid]\norigin = -1\nspacing = 0.5\ncounts = 5,4,3\n[run]\nseed = 9\n");
    ASSERT_EQ(run("--config " + ini.string() + " " + out_flag(d) + " bps"), 0);
    auto v = mio::read_volume((d / "bps_higgs_norm.vol").string());
    EXPECT_EQ(v.grid.counts, (std::array<int, 3>{5, 4, 3}));
    EXPECT_EQ(v.grid.spacing, Vec3(0.5, 0.5, 0.5));
    ASSERT_EQ(run("--config " + ini.string() + " --grid 1,3 " + out_flag(d) + " bps"), 0);
    v = mio::read_volume((d / "bps_higgs_norm.vol").string());
    EXPECT_EQ(v.grid.counts, (std::array<int, 3>{3, 3, 3}));
    EXPECT_EQ(run("--config " + (d / "missing.ini").string() + " " + out_flag(d) + " bps"), 4);
    mio::write_file(ini.string(), "[tolerances]\node_tol = -1\n");
    EXPECT_EQ(run("--config " + ini.string() + " " + out_flag(d) + " bps"), 2);
}

TEST(CliErrors, ExitCodes) {
    const auto d = fresh_dir("errors");
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("bps --no-such-flag"), 2);
    EXPECT_EQ(run("--format xml bps"), 2);
    EXPECT_EQ(run("--grid 1 " + out_flag(d) + " bps"), 2);
    EXPECT_EQ(run(out_flag(d) + " verify --source nowhere"), 2);
    EXPECT_EQ(run(out_flag(d) + " verify --source volume --input " + (d / "none.vol").string()), 4);
    mio::write_file((d / "blocker").string(), "x");
    EXPECT_EQ(run("--out " + (d / "blocker" / "sub").string() + " bps"), 4);
}

TEST(CliVerify, BuiltinBps) {
    const auto d = fresh_dir("verify_bps");
    ASSERT_EQ(run(out_flag(d) + " verify --source bps --centre 0.3,-0.2,0.5"), 0);
    const auto r = read(d / "verify_report.json");
    EXPECT_LT(r["bogomolny"]["max_residual"].get<double>(), 1e-10);
    EXPECT_GE(r["convergence"]["order"].get<double>(), 1.9);
    EXPECT_NEAR(r["energy"]["e0"].get<double>(), 2.0 / 3.0, 1e-6);
    EXPECT_LT(r["energy"]["max_density_vs_laplacian"].get<double>(), 1e-4);
    ASSERT_EQ(r["gauge_invariance"].size(), 3u);
    for (const auto& g : r["gauge_invariance"]) EXPECT_LT(g["higgs_norm"].get<double>(), 1e-12);
    EXPECT_TRUE(r["pass"].get<bool>());
}

TEST(CliVerify, NahmReconstruction) {
    const auto d = fresh_dir("verify_nahm");
    ASSERT_EQ(run(out_flag(d) + " verify --source nahm --points 10"), 0);
    const auto r = read(d / "verify_report.json");
    EXPECT_LT(r["bogomolny"]["max_residual"].get<double>(), 5e-6);
    EXPECT_LT(r["higgs_norm_vs_closed_form"].get<double>(), 1e-6);
    EXPECT_GT(r["convergence"]["order"].get<double>(), 1.8);
}

TEST(CliVerify, VolumeCleanAndCorrupted) {
    const auto d = fresh_dir("verify_vol");
    const auto cfg = bps_config(Vec3(0.1, -0.1, 0.2));
    const GridSpec g = GridSpec::cube(2.0, 21);
    auto vals = sample_grid<FieldValue>(g, [&](const Vec3& x) { return cfg.eval(x); });
    mio::write_file((d / "clean.vol").string(), [&] {
        std::ostringstream s;
        mio::write_volume(s, mio::configuration_volume(g, vals));
        return s.str();
    }());
    ASSERT_EQ(run(out_flag(d) + " verify --source volume --input " + (d / "clean.vol").string()), 0);
    EXPECT_TRUE(read(d / "verify_report.json")["pass"].get<bool>());

    std::mt19937_64 rng(42);
    std::normal_distribution<double> n(0.0, 1e-2);
    for (auto& v : vals) v.Phi = Su2Element::from_components(v.Phi.components() + Vec3(n(rng), n(rng), n(rng)));
    mio::write_file((d / "noisy.vol").string(), [&] {
        std::ostringstream s;
        mio::write_volume(s, mio::configuration_volume(g, vals));
        return s.str();
    }());
    EXPECT_EQ(run(out_flag(d) + " verify --source volume --input " + (d / "noisy.vol").string()), 2);
    const auto r = read(d / "verify_report.json");
    EXPECT_FALSE(r["pass"].get<bool>());
    EXPECT_GT(r["bogomolny"]["max_residual"].get<double>(), r["bogomolny"]["threshold"].get<double>());
}

TEST(CliScan, BpsCentreAndVacuum) {
    const auto d = fresh_dir("scan");
    ASSERT_EQ(run("--format csv " + out_flag(d) + " scan --source bps --centre 0.3,-0.2,0.5 --zetas 9"), 0);
    const auto r = read(d / "scan.json");
    EXPECT_LT((vec(r["centre"]) - Vec3(0.3, -0.2, 0.5)).norm(), 1e-3);
    EXPECT_LT(r["reality_defect"].get<double>(), 1e-3);
    std::string header;
    EXPECT_EQ(read_csv(d / "scan_roots.csv", header).size(), 9u);
    EXPECT_EQ(header, "zeta_re,zeta_im,eta_re,eta_im");
    EXPECT_EQ(run(out_flag(d) + " scan --source vacuum"), 2);
}

TEST(CliRmap, DonaldsonAndJarvis) {
    const auto d = fresh_dir("rmap");
    ASSERT_EQ(run(out_flag(d) + " rmap --mode donaldson --source bps --centre 0.3,-0.2,0.5"), 0);
    auto r = read(d / "rmap.json");
    ASSERT_EQ(r["poles"].size(), 1u);
    EXPECT_LT(std::abs(mio::complex_from_json(r["poles"][0]) - cplx(0.3, -0.2)), 1e-4);
    EXPECT_EQ(r["frame"]["n3"], mio::to_json(Vec3(0, 0, 1)));
    ASSERT_EQ(run(out_flag(d) + " rmap --mode jarvis --source bps"), 0);
    EXPECT_EQ(read(d / "rmap.json")["degree"], 1);
    ASSERT_EQ(run(out_flag(d) + " rmap --mode jarvis --source vacuum --base 0.3,0.1,-0.2"), 0);
    r = read(d / "rmap.json");
    EXPECT_EQ(r["degree"], 0);
    EXPECT_EQ(vec(r["base"]), Vec3(0.3, 0.1, -0.2));
    EXPECT_EQ(run(out_flag(d) + " rmap --mode donaldson --source vacuum"), 2);
}

TEST(CliNahm, EvolvePoleMatchesExact) {
    const auto d = fresh_dir("nahm_evolve");
    ASSERT_EQ(run(out_flag(d) + " nahm evolve --family pole --k 3"), 0);
    const auto r = read(d / "nahm_conservation.json");
    EXPECT_LT(r["max_error_vs_exact"].get<double>(), 1e-8);
    EXPECT_LT(r["char_poly_drift"].get<double>(), 1e-8);
    const auto traj = mio::nahm_from_json(read(d / "nahm_trajectory.json"));
    EXPECT_EQ(traj.k(), 3);
    EXPECT_NEAR(traj.z_samples().back(), 0.9, 1e-15);
}

TEST(CliNahm, RandomIsSeeded) {
    const auto a = fresh_dir("nahm_a"), b = fresh_dir("nahm_b"), c = fresh_dir("nahm_c");
    ASSERT_EQ(run(out_flag(a) + " nahm evolve --family random --k 2"), 0);
    ASSERT_EQ(run("--seed 42 " + out_flag(b) + " nahm evolve --family random --k 2"), 0);
    ASSERT_EQ(run("--seed 7 " + out_flag(c) + " nahm evolve --family random --k 2"), 0);
    const auto ta = mio::read_file((a / "nahm_trajectory.json").string());
    EXPECT_EQ(ta, mio::read_file((b / "nahm_trajectory.json").string()));
    EXPECT_NE(ta, mio::read_file((c / "nahm_trajectory.json").string()));
    EXPECT_LT(read(a / "nahm_conservation.json")["char_poly_drift"].get<double>(), 1e-8);
    EXPECT_TRUE(read(a / "nahm_conservation.json")["max_error_vs_exact"].is_null());
}

TEST(CliNahm, CurveOfPointData) {
    const auto d = fresh_dir("nahm_curve");
    ASSERT_EQ(run(out_flag(d) + " nahm curve --point 0.3,-0.2,0.5"), 0);
    const auto r = read(d / "nahm_curve.json");
    EXPECT_LT((vec(r["centre"]) - Vec3(0.3, -0.2, 0.5)).norm(), 1e-12);
    EXPECT_EQ(r["k"], 1);
    // curve of a saved trajectory
    ASSERT_EQ(run(out_flag(d) + " nahm evolve --family torus --z0 -0.5 --z1 0.5"), 0);
    ASSERT_EQ(run(out_flag(d) + " nahm curve --input " + (d / "nahm_trajectory.json").string()), 0);
    EXPECT_EQ(read(d / "nahm_curve.json")["k"], 2);
}

TEST(CliNahm, ReconstructPoint) {
    const auto d = fresh_dir("nahm_recon");
    ASSERT_EQ(run("--grid 1.5,7 " + out_flag(d) + " nahm reconstruct --point 0.2,0.1,-0.1"), 0);
    const auto r = read(d / "nahm_reconstruct_report.json");
    EXPECT_LT(r["higgs_norm_vs_closed_form"].get<double>(), 1e-6);
    EXPECT_TRUE(r["failures"].empty());
    const auto vol = mio::read_volume((d / "nahm_fields.vol").string());
    EXPECT_EQ(vol.field, mio::kConfigurationField);
    EXPECT_EQ(vol.columns, 32);
    const auto vals = mio::configuration_from_volume(vol);
    const auto hn = mio::read_volume((d / "nahm_higgs_norm.vol").string());
    for (std::size_t n = 0; n < vals.size(); ++n) EXPECT_EQ(norm(vals[n].Phi), hn.values[n][0]);
}
