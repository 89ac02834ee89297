// Gate runner for the fourteen acceptance criteria.  Each criterion prints
// one [PASS]/[FAIL] line with its measured values; the process exits 0 iff
// every line passes.  All tolerances are fixed here:
//   - absolute gates follow the criterion statements (5e-3, 1e-10, 10h^2,
//     20h^2 + 1e-3, 1e-9, 1e-12);
//   - dyadic refinement ratios of *stencil residuals tied to one analytic
//     value* must sit in [3.5, 4.5];
//   - refinement ratios of *field-max statistics* use [2.5, 6.0]: the argmax
//     node may move between grids, so the local truncation constant changes
//     while the order does not;
//   - log-log slopes (criterion 4) are taken over the 65 -> 129 pair, the
//     most asymptotic desk-scale pair, gated at the stated order +- 0.2;
//     statistics at the arithmetic noise floor (< 1e-10) pass by floor.
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "lagsurf/pipeline.hpp"

using namespace lagsurf;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

bool g_all = true;

void line(int id, const char* name, bool ok, const std::string& detail) {
    g_all = g_all && ok;
    std::printf("[%s] %02d %-18s %s\n", ok ? "PASS" : "FAIL", id, name,
                detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Grid gr(int n) { return Grid(-1, 1, -1, 1, n, n); }
double h2(int n) { return 4.0 / ((n - 1.0) * (n - 1.0)); }
double ratio_of(double coarse, double fine) { return coarse / fine; }
bool in_band(double x, double lo, double hi) { return x >= lo && x <= hi; }

constexpr double kValueBandLo = 3.5, kValueBandHi = 4.5;
constexpr double kMaxStatLo = 2.5, kMaxStatHi = 6.0;
constexpr double kNoiseFloor = 1e-10;

struct Run {
    InvariantField inv;
    IntegrationResult ir;
    LegendreRealization lift;
    SurfaceMaps maps;
};

Run run_pipeline(const Potential& p, double m, Scheme s,
                 double threshold = 0.0) {
    Run r{invariants_from_potential(p, m), {}, {}, {}};
    r.ir = integrate_frame(assemble_alpha(r.inv), LaguerreElement{}, s,
                           threshold);
    r.lift = realize_legendre(r.ir.field);
    r.maps = surface_maps(r.ir.field, r.lift);
    return r;
}

// ---------------------------------------------------------------------------

void criterion_1() {
    double r[2][2];
    int t = 0;
    for (int n : {65, 129}) {
        r[t][0] = max_abs_interior(liouville_residual(seed_radial(gr(n), 1.0, 1.0).u, 1.0));
        r[t][1] = max_abs_interior(liouville_residual(seed_cosh1d(gr(n), 1.0, 1.0).u, 1.0));
        ++t;
    }
    const double qr = ratio_of(r[0][0], r[1][0]);
    const double qc = ratio_of(r[0][1], r[1][1]);
    const bool ok = r[0][0] < 5e-3 && r[0][1] < 5e-3 &&
                    in_band(qr, kValueBandLo, kValueBandHi) &&
                    in_band(qc, kValueBandLo, kValueBandHi);
    line(1, "analytic-seeds", ok,
         fmt("radial65=%.3e cosh65=%.3e (<5e-3) ratios=%.2f,%.2f ([3.5,4.5])",
             r[0][0], r[0][1], qr, qc));
}

void criterion_2() {
    double err[2];
    int iters = 0;
    double final_res = 1.0;
    bool conv = false;
    int t = 0;
    for (int n : {65, 129}) {
        const Grid g = gr(n);
        const Potential exact = seed_radial(g, 1.0, 1.0);
        const NewtonResult nr =
            newton_solve_liouville(1.0, exact.u, ScalarField(g), 1e-10, 25);
        double e = 0.0;
        for (std::size_t s = 0; s < g.size(); ++s)
            e = std::max(e, std::fabs(nr.potential.u.v[s] - exact.u.v[s]));
        err[t++] = e;
        if (n == 65) {
            conv = nr.trace.converged;
            iters = nr.trace.iterations;
            final_res = nr.trace.residuals.back();
        }
    }
    const double q = ratio_of(err[0], err[1]);
    const bool ok = conv && iters <= 12 && final_res < 1e-10 &&
                    err[0] < 5e-3 && in_band(q, kValueBandLo, kValueBandHi);
    line(2, "newton-solver", ok,
         fmt("iters=%d (<=12) final=%.2e (<1e-10) err65=%.3e (<5e-3) ratio=%.2f",
             iters, final_res, err[0], q));
}

void criterion_3() {
    double f[2][2];
    int t = 0;
    for (int n : {65, 129}) {
        const Potential p = seed_radial(gr(n), 1.0, 1.0);
        f[t][0] = flatness_residual(assemble_alpha(p, 0.0)).max;
        f[t][1] = flatness_residual(assemble_alpha(p, 1.0)).max;
        ++t;
    }
    const double q0 = ratio_of(f[0][0], f[1][0]);
    const double q1 = ratio_of(f[0][1], f[1][1]);
    const bool ok = in_band(q0, kValueBandLo, kValueBandHi) &&
                    in_band(q1, kValueBandLo, kValueBandHi);
    line(3, "flatness", ok,
         fmt("m=0: %.3e->%.3e ratio=%.2f  m=1 ratio=%.2f ([3.5,4.5])",
             f[0][0], f[1][0], q0, q1));
}

void criterion_4() {
    bool ok = true;
    std::string detail;
    for (Scheme s : {Scheme::midpoint_exp, Scheme::euler}) {
        double hol[2], drf[2], con[2];
        int t = 0;
        for (int n : {65, 129}) {
            const Potential p = seed_radial(gr(n), 1.0, 1.0);
            const Run r = run_pipeline(p, 0.0, s);
            hol[t] = r.ir.report.holonomy_max;
            drf[t] = r.ir.report.frame_drift_max;
            con[t] = r.lift.contact_residual_max;
            ++t;
        }
        const double want = s == Scheme::midpoint_exp ? 2.0 : 1.0;
        const double sh = std::log2(hol[0] / hol[1]);
        const double sc = std::log2(con[0] / con[1]);
        const bool drift_floor =
            drf[0] <= kNoiseFloor && drf[1] <= kNoiseFloor;
        const double sd = drift_floor ? want : std::log2(drf[0] / drf[1]);
        const bool this_ok = std::fabs(sh - want) <= 0.2 &&
                             std::fabs(sc - want) <= 0.2 &&
                             (drift_floor || std::fabs(sd - want) <= 0.2);
        ok = ok && this_ok;
        detail += fmt("%s: hol=%.2f contact=%.2f drift=%s (want %.0f+-0.2)  ",
                      to_string(s), sh, sc,
                      drift_floor ? "floor" : fmt("%.2f", sd).c_str(), want);
    }
    line(4, "frame-integrity", ok, detail);
}

void criterion_5() {
    const Potential p = seed_radial(gr(65), 1.0, 1.0);
    const MaurerCartanField alpha = assemble_alpha(p, 0.0);
    const IntegrationResult base =
        integrate_frame(alpha, LaguerreElement{}, Scheme::midpoint_exp);

    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    Mat4 S = Mat4::zero();
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            S(i, j) = u(rng);
            S(j, i) = -S(i, j);
        }
    AlgebraElement xi{metric_matrix() * S, Vec4{{u(rng), u(rng), u(rng), u(rng)}}};
    const LaguerreElement B = algebra_exp(xi);

    const IntegrationResult moved =
        integrate_frame(alpha, B, Scheme::midpoint_exp);
    const FrameField translated = left_translate(B, base.field);
    double d = 0.0;
    for (std::size_t t = 0; t < translated.A.size(); ++t)
        d = std::max(d, element_distance(moved.field.A[t], translated.A[t]));
    line(5, "gauge-covariance", d < 1e-9,
         fmt("max|integrate(B.A0) - B.integrate(A0)| = %.3e (<1e-9)", d));
}

void criterion_6() {
    DifferentialReport d[2];
    int t = 0;
    for (int n : {65, 129})
        d[t++] = differentials(
            invariants_from_potential(seed_radial(gr(n), 1.0, 1.0), 1.0));
    const double tol = 10.0 * h2(65);
    const double qcr = ratio_of(d[0].cr_residual, d[1].cr_residual);
    const bool ok = std::fabs(d[0].Q_const - (-0.5)) < tol &&
                    d[0].Q_spread < tol &&
                    in_band(qcr, kMaxStatLo, kMaxStatHi) &&
                    std::fabs(d[0].ratio - d[0].ratio_expected) < 1e-3 &&
                    d[0].ratio_expected == -1.0 / 32.0;
    line(6, "holomorphicity", ok,
         fmt("Qe4u=%.6f (-0.5 +-%.1e) spread=%.1e cr_ratio=%.2f Q/P^2=%.7f (want %.7f)",
             d[0].Q_const, tol, d[0].Q_spread, qcr, d[0].ratio,
             d[0].ratio_expected));
}

void criterion_7() {
    bool ok = true;
    std::string detail;
    // character +1 and -1: value + class at 65, order via 65 -> 129
    for (double c : {1.0, -1.0}) {
        HyperplaneReport hp[2];
        int t = 0;
        for (int n : {65, 129}) {
            const Potential p = seed_radial(gr(n), c, 0.0);
            const Run r = run_pipeline(p, 0.0, Scheme::midpoint_exp,
                                       500.0 * flatness_baseline(gr(n)));
            hp[t++] = hyperplane_detect(r.ir.field, r.inv);
        }
        const double vtol = 10.0 * h2(65) * (1.0 + std::fabs(c));
        const double qd = ratio_of(hp[0].dv_max, hp[1].dv_max);
        const double qp = ratio_of(hp[0].plane_residual, hp[1].plane_residual);
        const HyperplaneClass want =
            c > 0 ? HyperplaneClass::spacelike : HyperplaneClass::timelike;
        const bool this_ok = hp[0].cls == want && hp[1].cls == want &&
                             std::fabs(hp[0].vv - (-c)) < vtol &&
                             in_band(qd, kMaxStatLo, kMaxStatHi) &&
                             in_band(qp, kMaxStatLo, kMaxStatHi);
        ok = ok && this_ok;
        detail += fmt("c=%+g: %s vv=%.5f dv_ratio=%.2f pl_ratio=%.2f  ", c,
                      to_string(hp[0].cls), hp[0].vv, qd, qp);
    }
    // character 0: exact isotropic hyperplane
    {
        const Potential p = seed_harmonic(gr(65), 0.5, 0.25, 0.0);
        const Run r = run_pipeline(p, 0.0, Scheme::midpoint_exp);
        const HyperplaneReport hp = hyperplane_detect(r.ir.field, r.inv);
        const double tol = 10.0 * h2(65);
        const bool this_ok = hp.cls == HyperplaneClass::isotropic &&
                             std::fabs(hp.vv) < tol && hp.dv_max < tol &&
                             hp.plane_residual < tol;
        ok = ok && this_ok;
        detail += fmt("c=0: %s vv=%.1e dv=%.1e", to_string(hp.cls), hp.vv,
                      hp.dv_max);
    }
    line(7, "minimal-hyperplane", ok, detail);
}

struct QuadricRun {
    QuadricFit fit;
    CmcReport cmc;
};

QuadricRun quadric_run(double c, double m, int n) {
    const Potential p = seed_radial(gr(n), c, 1.0);
    const Run r = run_pipeline(p, m, Scheme::midpoint_exp);
    QuadricRun q;
    q.fit = quadric_detect(r.ir.field, r.inv);
    q.cmc = cmc_in_quadric(r.ir.field, r.inv, q.fit);
    return q;
}

void criterion_8_9() {
    const double rtol = 10.0 * h2(65);
    const double stol = 20.0 * h2(65);
    const double htol = 20.0 * h2(65) + 1e-3;
    bool ok8 = true, ok9 = true;
    std::string d8, d9;
    QuadricRun q[3];
    for (int m = 0; m < 3; ++m) {
        q[m] = quadric_run(1.0, m, 65);
        const double rho_exp = -1.0 / ((m + 1.0) * (m + 1.0));
        ok8 = ok8 && q[m].fit.cls == QuadricClass::hyperbolic &&
              std::fabs(q[m].fit.rho - rho_exp) < rtol &&
              q[m].fit.center_spread < stol && q[m].fit.value_spread < stol;
        d8 += fmt("rho%d=%.6f ", m, q[m].fit.rho);
        const double inv_meas = 1.0 / q[m].fit.rho +
                                q[m].cmc.H_mean * q[m].cmc.H_mean;
        ok9 = ok9 && std::fabs(q[m].cmc.H_mean - (m + 1.0)) < htol &&
              q[m].cmc.H_spread < stol && std::fabs(inv_meas) < htol;
        d9 += fmt("H%d=%.5f ", m, q[m].cmc.H_mean);
    }
    const QuadricRun ds = quadric_run(-1.0, 0.0, 65);
    ok8 = ok8 && ds.fit.cls == QuadricClass::de_sitter &&
          std::fabs(ds.fit.rho - 1.0) < rtol;
    d8 += fmt("| c=-1: %s rho=%.6f (+-%.1e)", to_string(ds.fit.cls),
              ds.fit.rho, rtol);
    const double ds_inv = 1.0 / ds.fit.rho + ds.cmc.H_mean * ds.cmc.H_mean;
    ok9 = ok9 && std::fabs(ds.cmc.H_mean - 1.0) < htol &&
          ds.cmc.H_spread < stol && std::fabs(ds_inv - 2.0) < htol;
    d9 += fmt("| c=-1: H=%.5f k+H^2=%.5f (2 +-%.1e)", ds.cmc.H_mean, ds_inv,
              htol);
    line(8, "pseudo-hyperspheres", ok8, d8);
    line(9, "cmc-values", ok9, d9);
}

void criterion_10() {
    double diff[2];
    int t = 0;
    for (int n : {65, 129}) {
        const Potential p = seed_radial(gr(n), 1.0, 1.0);
        MetricReport met[2];
        int s = 0;
        for (double m : {0.0, 2.0}) {
            const Run r = run_pipeline(p, m, Scheme::midpoint_exp);
            met[s++] = induced_metric(r.maps.sigma, r.inv.u);
        }
        diff[t++] = metric_difference(met[0], met[1]);
    }
    const double q = ratio_of(diff[0], diff[1]);
    const bool ok = diff[0] < 20.0 * h2(65) && in_band(q, kMaxStatLo, kMaxStatHi);
    line(10, "lawson-isometry", ok,
         fmt("|g(m=0)-g(m=2)|: %.3e -> %.3e (<%.1e) ratio=%.2f ([2.5,6.0])",
             diff[0], diff[1], 20.0 * h2(65), q));
}

void criterion_11() {
    double rho65 = 0.0, tol65 = 0.0, light[2];
    bool cls_ok = true;
    int t = 0;
    for (int n : {65, 129}) {
        const Potential p = seed_harmonic(gr(n), 0.5, 0.25, 1.0);
        const Run r = run_pipeline(p, 0.0, Scheme::midpoint_exp);
        const QuadricFit fit = quadric_detect(r.ir.field, r.inv);
        cls_ok = cls_ok && fit.cls == QuadricClass::lightcone;
        double lmax = 0.0;
        for (const Vec4& s : r.maps.sigma.v)
            lmax = std::max(lmax, std::fabs(lorentz_norm2(s - fit.O)));
        light[t++] = lmax;
        if (n == 65) {
            rho65 = fit.rho;
            tol65 = fit.cone_tol;
        }
    }
    const double q = ratio_of(light[0], light[1]);
    const bool ok = cls_ok && std::fabs(rho65) < tol65 &&
                    light[0] < 10.0 * h2(65) &&
                    in_band(q, kMaxStatLo, kMaxStatHi);
    line(11, "lightcone-branch", ok,
         fmt("rho=%.2e (cone_tol %.2e) lightlike=%.3e->%.3e ratio=%.2f",
             rho65, tol65, light[0], light[1], q));
}

void criterion_12() {
    MiddleSphereReport ms[2];
    int t = 0;
    for (int n : {65, 129}) {
        const Potential p = seed_radial(gr(n), 1.0, 0.0);
        const Run r = run_pipeline(p, 0.0, Scheme::midpoint_exp);
        ms[t++] = middle_sphere_check(r.maps);
    }
    const double qr = ratio_of(ms[0].radius_residual_max, ms[1].radius_residual_max);
    const double qc = ratio_of(ms[0].center_residual_max, ms[1].center_residual_max);
    const double tol = 10.0 * h2(65);
    const bool ok = ms[0].radius_residual_max < tol &&
                    ms[0].center_residual_max < tol &&
                    ms[0].nodes_checked > 1000 &&
                    in_band(qr, kMaxStatLo, kMaxStatHi) &&
                    in_band(qc, kMaxStatLo, kMaxStatHi);
    line(12, "middle-sphere", ok,
         fmt("radius=%.3e center=%.3e (<%.1e) ratios=%.2f,%.2f nodes=%d",
             ms[0].radius_residual_max, ms[0].center_residual_max, tol, qr,
             qc, ms[0].nodes_checked));
}

void criterion_13() {
    std::mt19937 rng(20260817u);
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    std::uniform_real_distribution<double> rad(-3.0, 3.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sphere_err = 0.0, contact_err = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const OrientedSphere s{{pos(rng), pos(rng), pos(rng)}, rad(rng)};
        const OrientedSphere back = point_to_sphere(sphere_to_point(s));
        sphere_err = std::max(
            sphere_err, std::max(max_abs(back.center - s.center),
                                 std::fabs(back.radius - s.radius)));
        Vec3 nrm{gauss(rng), gauss(rng), gauss(rng)};
        if (norm(nrm) < 0.1) nrm = Vec3{1.0, 0.0, 0.0};
        const ContactElement ce{{pos(rng), pos(rng), pos(rng)},
                                (1.0 / norm(nrm)) * nrm};
        const ContactElement ceb = line_to_contact(contact_to_line(ce));
        contact_err = std::max(
            contact_err, std::max(max_abs(ceb.point - ce.point),
                                  max_abs(ceb.unit_normal - ce.unit_normal)));
    }
    const PairRelation concentric =
        pair_relation({{1.0, 2.0, 3.0}, 1.0}, {{1.0, 2.0, 3.0}, 3.5});
    const PairRelation tangential =
        pair_relation({{0.0, 0.0, 0.0}, 2.0}, {{5.0, 0.0, 0.0}, 2.0});
    const PairRelation touching =
        pair_relation({{0.0, 0.0, 0.0}, 3.0}, {{1.0, 0.0, 0.0}, 2.0});
    const bool ok = sphere_err < 1e-12 && contact_err < 1e-12 &&
                    concentric.kind == PairKind::timelike_separated &&
                    std::fabs(concentric.separation - 2.5) < 1e-12 &&
                    tangential.kind == PairKind::spacelike_separated &&
                    std::fabs(tangential.separation - 5.0) < 1e-12 &&
                    touching.kind == PairKind::oriented_contact;
    line(13, "cyclographic-codec", ok,
         fmt("sphere=%.2e contact=%.2e (<1e-12) parallel=%.3f tangential=%.3f",
             sphere_err, contact_err, concentric.separation,
             tangential.separation));
}

// -- criterion 14: the CLI end of the pipeline ------------------------------

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(LAGSURF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void collect_leaves(const ordered_json& j, const std::string& prefix,
                    std::vector<std::string>& out) {
    if (j.is_object() && !j.empty()) {
        for (const auto& it : j.items())
            collect_leaves(it.value(), prefix + "/" + it.key(), out);
    } else if (j.is_array() && !j.empty()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            collect_leaves(j[i], prefix + "/" + std::to_string(i), out);
    } else {
        out.push_back(prefix);
    }
}

ordered_json corrupted(const ordered_json& leaf) {
    if (leaf.is_number()) return leaf.get<double>() + 1.25;
    if (leaf.is_boolean()) return !leaf.get<bool>();
    if (leaf.is_string()) return leaf.get<std::string>() + "x";
    if (leaf.is_array()) {
        ordered_json a = leaf;
        a.push_back(1.25);
        return a;
    }
    return 1.25;  // null or empty object
}

void criterion_14() {
    const fs::path base = fs::temp_directory_path() / "lagsurf_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string flags65 =
        "--kind radial --c 1 --k 1 --grid=-1:1:-1:1:65 --m-list 0,1,2 "
        "--scheme midpoint_exp --out " + (base / "canon").string();
    const int d65 = run_cli("deform " + flags65);
    const int v65 = run_cli("verify " + flags65);

    // corrupting any stored report field must flip verify to exit 1;
    // the sweep runs at 33^2 to keep the walk fast, then the tree is
    // restored and must verify clean again
    const std::string flags33 =
        "--kind radial --c 1 --k 1 --grid=-1:1:-1:1:33 --m-list 0,1,2 "
        "--scheme midpoint_exp --out " + (base / "sweep").string();
    const int d33 = run_cli("deform " + flags33);
    const fs::path rp = base / "sweep" / "m_1" / "report.json";
    const std::string pristine = slurp(rp);
    ordered_json rep = ordered_json::parse(pristine);
    std::vector<std::string> leaves;
    collect_leaves(rep, "", leaves);
    int caught = 0, tried = 0;
    std::string first_missed;
    for (const std::string& ptr : leaves) {
        ordered_json copy = rep;
        copy[ordered_json::json_pointer(ptr)] =
            corrupted(rep[ordered_json::json_pointer(ptr)]);
        {
            std::ofstream out(rp);
            out << copy.dump(2) << '\n';
        }
        ++tried;
        if (run_cli("verify " + flags33) == 1)
            ++caught;
        else if (first_missed.empty())
            first_missed = ptr;
    }
    {
        std::ofstream out(rp);
        out << pristine;
    }
    const int v33 = run_cli("verify " + flags33);

    const bool ok = d65 == 0 && v65 == 0 && d33 == 0 && v33 == 0 &&
                    caught == tried && tried > 50;
    line(14, "cli-gates", ok,
         fmt("deform65=%d verify65=%d corrupted-fields caught=%d/%d restore=%d%s%s",
             d65, v65, caught, tried, v33,
             first_missed.empty() ? "" : " missed=",
             first_missed.c_str()));
}

}  // namespace

int main() {
    std::printf("acceptance: fourteen pinned gates, grids 33^2..129^2\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    criterion_14();
    std::printf("RESULT: %s\n", g_all ? "all criteria pass" : "FAILURES");
    return g_all ? 0 : 1;
}
