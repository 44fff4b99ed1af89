// Command-line harness: instance generation, experiment execution with
// optional reference certification, and JSON/CSV reporting.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dualex/critpoint.hpp"
#include "dualex/cvar.hpp"
#include "dualex/framework.hpp"
#include "dualex/kernels.hpp"
#include "dualex/matgames.hpp"
#include "dualex/rng.hpp"
#include "dualex/setups.hpp"
#include "support/reference.hpp"

using namespace dualex;
using nlohmann::json;

namespace {

struct Report {
    std::string task;
    std::uint64_t seed = 0;
    std::size_t n = 0, d = 0;
    double alpha = 0, eps = 0, gamma = 0;
    double metric = 0, bound = 0;
    std::uint64_t queries = 0;
    double millis = 0;
    bool pass = false;
};

void emit_report(const Report& r, const std::string& json_path,
                 const std::string& csv_path) {
    json j = {{"task", r.task},     {"seed", r.seed},   {"n", r.n},
              {"d", r.d},           {"alpha", r.alpha}, {"eps", r.eps},
              {"gamma", r.gamma},   {"metric", r.metric}, {"bound", r.bound},
              {"queries", r.queries}, {"millis", r.millis}, {"pass", r.pass}};
    if (!json_path.empty()) {
        std::ofstream out(json_path, std::ios::app);
        if (!out) throw InvalidInputError("cannot open json output: " + json_path);
        out << j.dump() << "\n";
    }
    if (!csv_path.empty()) {
        bool need_header =
            !std::filesystem::exists(csv_path) || std::filesystem::file_size(csv_path) == 0;
        std::ofstream out(csv_path, std::ios::app);
        if (!out) throw InvalidInputError("cannot open csv output: " + csv_path);
        if (need_header) out << "task,seed,n,d,alpha,eps,gamma,metric,bound,queries,millis,pass\n";
        out << r.task << ',' << r.seed << ',' << r.n << ',' << r.d << ',' << r.alpha
            << ',' << r.eps << ',' << r.gamma << ',' << r.metric << ',' << r.bound << ','
            << r.queries << ',' << r.millis << ',' << (r.pass ? 1 : 0) << "\n";
    }
    std::cout << j.dump() << "\n";
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          t0)
            .count();
    }
};

MatrixGame generate_matgame(std::size_t d, std::size_t n, PrimalDomain dom,
                            std::uint64_t seed) {
    auto rng = make_stream(seed, 100);
    MatrixGame g;
    g.A = Matrix(d, n);
    g.primal_domain = dom;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : g.A.data) v = u(rng);
    if (dom == PrimalDomain::Ball) {
        for (std::size_t j = 0; j < n; ++j) {
            double nrm = 0;
            for (std::size_t i = 0; i < d; ++i) nrm += g.A(i, j) * g.A(i, j);
            nrm = std::sqrt(nrm);
            if (nrm > 1.0)
                for (std::size_t i = 0; i < d; ++i) g.A(i, j) /= nrm;
        }
    }  // simplex entries are already in [-1, 1]
    g.validate();
    return g;
}

CvarProblem generate_cvar(std::size_t n, std::size_t d, double alpha, double eps,
                          std::uint64_t seed) {
    auto rng = make_stream(seed, 101);
    AffineLosses losses;
    losses.a = Matrix(n, d);
    losses.b = Vec(n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double G = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double nrm = 0;
        for (std::size_t j = 0; j < d; ++j)
            nrm += (losses.a(i, j) = 0.2 * u(rng)) * losses.a(i, j);
        nrm = std::sqrt(nrm);
        G = std::max(G, nrm);
        // b keeps <a,x> + b inside [0, 1] over the unit ball.
        std::uniform_real_distribution<double> ub(nrm, 1.0 - nrm);
        losses.b[i] = ub(rng);
    }
    CvarDomain dom;
    dom.kind = CvarDomain::Kind::Ball;
    dom.center = Vec(d, 0.0);
    dom.radius = 1.0;
    return CvarProblem::from_affine(std::move(losses), std::move(dom), alpha, 1.0,
                                    std::max(G, 1e-6), eps);
}

Matrix random_psd(std::size_t d, double lmin, double lmax, std::mt19937_64& rng) {
    Matrix Q(d, d);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < d; ++i)
        Q(i, i) = lmin + (lmax - lmin) * (d == 1 ? 0.0 : static_cast<double>(i) / (d - 1));
    for (int sweep = 0; sweep < 4; ++sweep) {
        for (std::size_t p = 0; p + 1 < d; ++p) {
            std::size_t q = p + 1 + static_cast<std::size_t>(u(rng) * (d - p - 1));
            double th = u(rng) * 3.14159;
            double c = std::cos(th), s = std::sin(th);
            for (std::size_t i = 0; i < d; ++i) {
                double a = Q(p, i), b = Q(q, i);
                Q(p, i) = c * a - s * b;
                Q(q, i) = s * a + c * b;
            }
            for (std::size_t i = 0; i < d; ++i) {
                double a = Q(i, p), b = Q(i, q);
                Q(i, p) = c * a - s * b;
                Q(i, q) = s * a + c * b;
            }
        }
    }
    return Q;
}

// Projection onto {y : sum y = 1, 0 <= y_i <= cap}.
Vec project_capped_simplex(Vec p, double cap) {
    auto mass = [&](double tau) {
        double s = 0;
        for (double v : p) s += std::clamp(v - tau, 0.0, cap);
        return s;
    };
    double lo = -1.0 - cap, hi = 1.0;
    for (double v : p) {
        lo = std::min(lo, v - cap);
        hi = std::max(hi, v);
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (mass(mid) > 1.0 ? lo : hi) = mid;
    }
    Vec y(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        y[i] = std::clamp(p[i] - 0.5 * (lo + hi), 0.0, cap);
    double s = 0;
    for (double v : y) s += v;
    for (auto& v : y) v /= s;
    return y;
}

// Supergradient-ascent reference for the capped-simplex CVaR dual (affine
// losses over a centered ball), certified by a Frank-Wolfe gap <= tol.
double cvar_reference(const CvarProblem& prob, double tol) {
    const std::size_t n = prob.n, d = prob.dim;
    const auto& losses = *prob.affine;
    const double cap = prob.hi();
    auto supergrad = [&](const Vec& y) {
        Vec abar(d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) abar[j] += y[i] * losses.a(i, j);
        double nrm = kernels::nrm2(abar);
        Vec xs(d, 0.0);
        if (nrm > 1e-300)
            for (std::size_t j = 0; j < d; ++j)
                xs[j] = prob.domain.center[j] - prob.domain.radius * abar[j] / nrm;
        Vec g(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = losses.b[i];
            for (std::size_t j = 0; j < d; ++j) g[i] += losses.a(i, j) * xs[j];
        }
        return g;
    };
    auto fw_gap = [&](const Vec& y) {
        Vec g = supergrad(y);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return g[a] > g[b]; });
        double m = 0, lin = 0;
        for (std::size_t i : idx) {
            double take = std::min(cap, 1.0 - m);
            lin += take * g[i];
            m += take;
            if (m >= 1.0 - 1e-15) break;
        }
        return lin - kernels::dot(g, y);
    };
    Vec y(n, 1.0 / static_cast<double>(n)), avg = y, best = y;
    double best_gap = 1e300;
    for (int t = 1; t <= 2000000; ++t) {
        Vec g = supergrad(y);
        double step = 1.0 / std::sqrt(static_cast<double>(t));
        for (std::size_t i = 0; i < n; ++i) y[i] += step * g[i];
        y = project_capped_simplex(y, cap);
        for (std::size_t i = 0; i < n; ++i) avg[i] += (y[i] - avg[i]) / (t + 1);
        if (t % 2000 == 0) {
            double gp = fw_gap(avg);
            if (gp < best_gap) {
                best_gap = gp;
                best = avg;
            }
            if (best_gap <= tol) break;
        }
    }
    if (best_gap > tol)
        throw ConvergenceError("cvar reference did not certify", best_gap);
    return dual_value_cvar(prob, best, 1e-12);
}

// ---------------------------------------------------------------------------
// property suite: fast invariant checks across all modules.

bool run_suite(std::uint64_t seed, bool quick) {
    struct Check {
        std::string name;
        bool ok;
    };
    std::vector<Check> checks;
    auto add = [&](const std::string& name, bool ok) {
        checks.push_back({name, ok});
        std::cout << "  " << name << ": " << (ok ? "ok" : "FAIL") << "\n";
    };
    auto rng = make_stream(seed, 200);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int reps = quick ? 20 : 200;

    {  // kernels: serial/parallel parity
        bool ok = true;
        for (int t = 0; t < reps && ok; ++t) {
            std::size_t len = 1 + static_cast<std::size_t>((u(rng) + 1.0) * 8000);
            Vec a(len), b(len);
            for (auto& v : a) v = u(rng);
            for (auto& v : b) v = u(rng);
            ok = std::fabs(kernels::dot_serial(a, b) - kernels::dot_omp(a, b)) <=
                 1e-9 * len;
            Vec s1, s2;
            kernels::softmax_serial(a, s1);
            kernels::softmax_omp(a, s2);
            for (std::size_t i = 0; i < len && ok; ++i)
                ok = std::fabs(s1[i] - s2[i]) <= 1e-12;
        }
        add("kernel serial/parallel parity", ok);
    }
    {  // stability of the simplex primitives
        bool ok = true;
        std::uniform_real_distribution<double> big(-1e4, 1e4);
        for (int t = 0; t < reps && ok; ++t) {
            Vec theta(8);
            for (auto& v : theta) v = big(rng);
            double l = log_sum_exp(theta);
            double shift = big(rng);
            Vec th2 = theta;
            for (auto& v : th2) v += shift;
            ok = std::isfinite(l) &&
                 std::fabs(log_sum_exp(th2) - l - shift) <= 1e-8 * std::max(1.0, std::fabs(l));
        }
        add("log_sum_exp shift invariance", ok);
    }
    {  // KL bounds
        bool ok = true;
        std::exponential_distribution<double> e(1.0);
        for (std::size_t n : {2ul, 10ul, 100ul}) {
            Vec uni(n, 1.0 / static_cast<double>(n));
            for (int t = 0; t < reps && ok; ++t) {
                Vec w(n);
                double s = 0;
                for (auto& v : w) s += (v = e(rng));
                for (auto& v : w) v /= s;
                double kl = kl_divergence(uni, w);
                double l1 = 0;
                for (std::size_t i = 0; i < n; ++i)
                    l1 += std::fabs(w[i] - uni[i]);
                ok = kl >= 0.5 * l1 * l1 - 1e-12 &&
                     kl <= std::log(static_cast<double>(n)) + 1e-12;
            }
        }
        add("KL within [Pinsker, ln n] from uniform", ok);
    }
    {  // conjugate map inverts the entropy gradient map
        bool ok = true;
        auto setup = entropy_simplex_setup(6);
        std::exponential_distribution<double> e(1.0);
        for (int t = 0; t < reps && ok; ++t) {
            Vec y(6);
            double s = 0;
            for (auto& v : y) s += (v = e(rng) + 1e-6);
            for (auto& v : y) v /= s;
            Vec back = setup.conjugate_grad_on_U(setup.r_grad(y));
            for (int i = 0; i < 6 && ok; ++i) ok = std::fabs(back[i] - y[i]) <= 1e-10;
        }
        add("entropy conjugate inversion", ok);
    }
    {  // schedules
        auto s = schedule_log_rounds(0.5, std::log(16.0), 1.0, 1.0);
        bool ok = s.K == 14 && std::fabs(s.eps_primal[0] - 0.5 / 56.0) < 1e-15;
        auto s2 = schedule_geometric_accuracy(0.1, 1.0, 3);
        ok = ok && std::fabs(s2.lambdas[2] - 0.1) < 1e-15 &&
             std::fabs(s2.eps_primal[2] - 1.0 / 270.0) < 1e-15;
        add("schedule pinned values", ok);
    }
    {  // matrix game dual against the LP reference
        std::size_t sz = quick ? 4 : 8;
        auto g = generate_matgame(sz, sz, PrimalDomain::Simplex, seed + 1);
        auto local = make_stream(seed, 201);
        auto res = solve_dual_matgame(g, 0.2, local);
        double ref = refsupport::simplex_game_value(g.A);
        add("matgame dual within eps of LP value",
            ref - dual_value(g, res.y) <= 0.2 + 1e-6);
    }
    {  // truncated entropic response: mass and box
        bool ok = true;
        std::exponential_distribution<double> e(1.0);
        for (int t = 0; t < reps && ok; ++t) {
            Vec v(8), q(8);
            double s = 0;
            for (auto& x : v) x = 3.0 * u(rng);
            for (auto& x : q) s += (x = e(rng) + 1e-9);
            for (auto& x : q) x /= s;
            Vec y = truncated_entropic_response(v, 0.4, q, 0.02, 0.5);
            double mass = 0;
            for (double yi : y) {
                ok = ok && yi >= 0.02 - 1e-12 && yi <= 0.5 + 1e-12;
                mass += yi;
            }
            ok = ok && std::fabs(mass - 1.0) <= 1e-12;
        }
        add("truncated entropic response feasibility", ok);
    }
    {  // mlmc collapses to the common gradient for identical losses
        AffineLosses losses;
        losses.a = Matrix(4, 2);
        losses.b = Vec(4, 0.5);
        for (std::size_t i = 0; i < 4; ++i) {
            losses.a(i, 0) = 0.1;
            losses.a(i, 1) = -0.2;
        }
        CvarDomain dom;
        dom.kind = CvarDomain::Kind::Ball;
        dom.center = {0.0, 0.0};
        dom.radius = 1.0;
        auto prob = CvarProblem::from_affine(std::move(losses), std::move(dom), 0.5, 1.0,
                                             0.3, 0.1);
        bool ok = true;
        auto local = make_stream(seed, 202);
        for (int t = 0; t < 20 && ok; ++t) {
            Vec g = mlmc_gradient(prob, {0.1, 0.2}, Vec(4, 0.25), 0.05, 16, local);
            ok = std::fabs(g[0] - 0.1) <= 1e-10 && std::fabs(g[1] + 0.2) <= 1e-10;
        }
        add("mlmc exact on identical losses", ok);
    }
    {  // fenchel closed form for g = (a/2) t^2
        bool ok = true;
        for (double a : {1.0, 2.0}) {
            Vec y = fenchel_drbr([a](const Vec& x) { return Vec{a * x[0]}; },
                                 [a](const Vec& q) { return Vec{q[0] / a}; }, {0.7}, 0.3,
                                 {0.4});
            ok = ok && std::fabs(y[0] - (a * 0.4 + 0.3 * 0.7) / 1.3) <= 1e-12;
        }
        add("fenchel best-response closed form", ok);
    }
    {  // boosting arithmetic
        add("boost call counts", boost_call_count(0.5, 0.01) == 7 &&
                                      boost_call_count(0.5, 0.25) == 2);
    }

    bool all = true;
    for (const auto& c : checks) all = all && c.ok;
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-extraction solvers: games, CVaR, critical points"};
    app.set_config("--config", "", "key=value config file (flags take precedence)");

    std::uint64_t seed = 0;
    bool seed_set = false;
    double eps = 0.1;
    std::string out, json_path, csv_path;
    bool use_ref = true;

    auto add_shared = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "random seed (mandatory)")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--eps", eps, "target accuracy");
        cmd->add_option("--out", out, "output path for generated instances");
        cmd->add_flag("--ref,!--no-ref", use_ref, "certify against the reference solver");
        cmd->add_option("--json", json_path, "append one JSON record to this file");
        cmd->add_option("--csv", csv_path, "append one CSV row to this file");
    };

    // gen
    auto* gen = app.add_subcommand("gen", "generate and serialize a problem instance");
    std::string gen_task = "matgame-ball";
    std::size_t gn = 32, gd = 32;
    double galpha = 0.25;
    bool gbinary = false;
    gen->add_option("--task", gen_task, "matgame-ball | matgame-simplex | cvar")
        ->check(CLI::IsMember({"matgame-ball", "matgame-simplex", "cvar"}));
    gen->add_option("--n", gn, "columns / number of losses");
    gen->add_option("--d", gd, "rows / primal dimension");
    gen->add_option("--alpha", galpha, "cvar level");
    gen->add_flag("--binary", gbinary, "matrix games: write the binary format");
    add_shared(gen);

    // matgame
    auto* mg = app.add_subcommand("matgame", "solve a matrix game and certify the gap");
    std::string mg_variant = "ball", mg_input;
    std::size_t mn = 32, md = 32;
    bool mg_primal = false, mg_binary = false;
    mg->add_option("--variant", mg_variant, "ball | simplex")
        ->check(CLI::IsMember({"ball", "simplex"}));
    mg->add_option("--input", mg_input, "load the payoff matrix instead of generating");
    mg->add_flag("--binary", mg_binary, "input file is in the binary format");
    mg->add_option("--n", mn, "columns");
    mg->add_option("--d", md, "rows");
    mg->add_flag("--primal", mg_primal, "solve the primal side (simplex variant only)");
    add_shared(mg);

    // cvar
    auto* cv = app.add_subcommand("cvar", "solve the CVaR dual and certify the gap");
    std::string cv_input;
    std::size_t cn = 20, cd = 5;
    double calpha = 0.25;
    cv->add_option("--input", cv_input, "load affine losses (CSV) instead of generating");
    cv->add_option("--n", cn, "number of losses");
    cv->add_option("--d", cd, "primal dimension");
    cv->add_option("--alpha", calpha, "cvar level in [1/n, 1]");
    add_shared(cv);

    // critpoint
    auto* cp = app.add_subcommand("critpoint",
                                  "find a small-gradient point on a quadratic family");
    std::size_t pd = 50;
    double cond = 10.0, gamma_mult = 0.01, gamma_abs = 0.0;
    cp->add_option("--d", pd, "dimension");
    cp->add_option("--cond", cond, "condition number of the quadratic");
    cp->add_option("--gamma-mult", gamma_mult, "gamma as a fraction of sqrt(2 beta Delta)");
    cp->add_option("--gamma", gamma_abs, "absolute gamma (overrides --gamma-mult)");
    add_shared(cp);

    // suite
    auto* su = app.add_subcommand("suite", "run the cross-module property suite");
    bool quick = false;
    su->add_flag("--quick", quick, "smaller sizes and fewer repetitions");
    add_shared(su);

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (!seed_set) throw InvalidInputError("--seed is mandatory");
        Report r;
        r.seed = seed;
        r.eps = eps;
        Timer timer;

        if (gen->parsed()) {
            if (out.empty()) throw InvalidInputError("gen requires --out");
            if (gen_task == "cvar") {
                auto prob = generate_cvar(gn, gd, galpha, eps, seed);
                std::ofstream f(out);
                if (!f) throw InvalidInputError("cannot open output: " + out);
                f.precision(17);
                for (std::size_t i = 0; i < gn; ++i) {
                    f << prob.affine->b[i];
                    for (std::size_t j = 0; j < gd; ++j) f << ',' << prob.affine->a(i, j);
                    f << "\n";
                }
                r.task = "gen-cvar";
                r.alpha = galpha;
            } else {
                auto dom = gen_task == "matgame-ball" ? PrimalDomain::Ball
                                                      : PrimalDomain::Simplex;
                auto g = generate_matgame(gd, gn, dom, seed);
                if (gbinary)
                    MatrixGame::save_binary(g.A, out);
                else
                    MatrixGame::save_csv(g.A, out);
                r.task = "gen-" + gen_task;
            }
            r.n = gn;
            r.d = gd;
            r.pass = true;
            r.millis = timer.ms();
            emit_report(r, json_path, csv_path);
            return 0;
        }

        if (mg->parsed()) {
            MatrixGame g;
            g.primal_domain =
                mg_variant == "ball" ? PrimalDomain::Ball : PrimalDomain::Simplex;
            if (!mg_input.empty())
                g.A = mg_binary ? MatrixGame::load_binary(mg_input)
                                : MatrixGame::load_csv(mg_input);
            else
                g = generate_matgame(md, mn, g.primal_domain, seed);
            g.validate();
            auto rng = make_stream(seed, 1);
            r.n = g.n();
            r.d = g.d();
            r.bound = eps;
            if (mg_primal) {
                if (g.primal_domain != PrimalDomain::Simplex)
                    throw InvalidInputError("--primal requires the simplex variant");
                Vec x = solve_primal_simplex_matgame(g, eps, rng);
                r.task = "matgame-primal";
                if (use_ref) {
                    r.metric = primal_value(g, x) - refsupport::simplex_game_value(g.A);
                } else {
                    auto dualres = solve_dual_matgame(g, eps, rng);
                    r.metric = primal_value(g, x) - dual_value(g, dualres.y);
                    r.bound = 2 * eps;  // both sides contribute eps
                }
            } else {
                auto res = solve_dual_matgame(g, eps, rng);
                r.task = "matgame-dual";
                r.queries = res.matvec_count;
                if (use_ref) {
                    double ref = g.primal_domain == PrimalDomain::Ball
                                     ? refsupport::ball_game_value(g.A, 1e-6)
                                     : refsupport::simplex_game_value(g.A);
                    r.metric = ref - dual_value(g, res.y);
                } else {
                    r.metric = res.duality_gap_certificate;
                }
            }
            r.pass = r.metric <= r.bound + 1e-6;
            r.millis = timer.ms();
            emit_report(r, json_path, csv_path);
            return r.pass ? 0 : 1;
        }

        if (cv->parsed()) {
            CvarProblem prob;
            if (!cv_input.empty()) {
                auto losses = CvarProblem::load_affine_csv(cv_input);
                cn = losses.a.rows;
                cd = losses.a.cols;
                CvarDomain dom;
                dom.kind = CvarDomain::Kind::Ball;
                dom.center = Vec(cd, 0.0);
                dom.radius = 1.0;
                double G = 0;
                for (std::size_t i = 0; i < cn; ++i) {
                    double nrm = 0;
                    for (std::size_t j = 0; j < cd; ++j)
                        nrm += losses.a(i, j) * losses.a(i, j);
                    G = std::max(G, std::sqrt(nrm));
                }
                prob = CvarProblem::from_affine(std::move(losses), std::move(dom), calpha,
                                                1.0, std::max(G, 1e-6), eps);
            } else {
                prob = generate_cvar(cn, cd, calpha, eps, seed);
            }
            auto rng = make_stream(seed, 2);
            auto res = solve_dual_cvar(prob, rng);
            r.task = "cvar-dual";
            r.n = cn;
            r.d = cd;
            r.alpha = calpha;
            r.queries = res.queries;
            r.bound = eps;
            if (use_ref) {
                double ref = cvar_reference(prob, 1e-4);
                r.metric = ref - dual_value_cvar(prob, res.y, 1e-12);
            } else {
                r.metric = res.certified_budget;
            }
            r.pass = r.metric <= r.bound + 1e-6;
            r.millis = timer.ms();
            emit_report(r, json_path, csv_path);
            return r.pass ? 0 : 1;
        }

        if (cp->parsed()) {
            auto rng = make_stream(seed, 3);
            const double beta = 1.0, Delta = 1.0;
            Matrix Q = random_psd(pd, 1.0 / cond, 1.0, rng);
            SmoothFnOracle h;
            h.value_fn = [Q](const Vec& x) {
                Vec qx;
                kernels::gemv(Q, x, qx);
                return 0.5 * kernels::dot(x, qx);
            };
            h.grad_fn = [Q](const Vec& x) {
                Vec qx;
                kernels::gemv(Q, x, qx);
                return qx;
            };
            h.beta = beta;
            Vec x0(pd);
            std::normal_distribution<double> nd;
            for (auto& v : x0) v = nd(rng);
            double val = h.value_fn(x0);
            for (auto& v : x0) v *= std::sqrt(Delta / val);
            CritConfig cfg;
            cfg.gamma = gamma_abs > 0 ? gamma_abs
                                      : gamma_mult * std::sqrt(2.0 * beta * Delta);
            cfg.x0 = x0;
            cfg.Delta = Delta;
            auto res = find_critical_point(h, cfg);
            r.task = "critpoint";
            r.d = pd;
            r.gamma = cfg.gamma;
            r.metric = res.grad_norm;
            r.bound = cfg.gamma;
            r.queries = res.queries;
            r.pass = r.metric <= r.bound;
            r.millis = timer.ms();
            emit_report(r, json_path, csv_path);
            return r.pass ? 0 : 1;
        }

        // suite
        bool ok = run_suite(seed, quick);
        r.task = "property-suite";
        r.metric = ok ? 0.0 : 1.0;
        r.pass = ok;
        r.millis = timer.ms();
        emit_report(r, json_path, csv_path);
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        const char* kind = "internal";
        if (dynamic_cast<const InvalidInputError*>(&e)) kind = "invalid-input";
        else if (dynamic_cast<const DomainError*>(&e)) kind = "domain";
        else if (dynamic_cast<const ConvergenceError*>(&e)) kind = "convergence";
        json err = {{"error", {{"type", kind}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
}
