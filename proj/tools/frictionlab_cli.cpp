// frictionlab command-line front end: raw simulation, posterior fitting,
// experiment presets, report recomputation and the domain policy gate.
//
// Exit codes: 0 success, 2 precondition/config error, 3 policy violation,
// 4 diagnostics failure.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "frictionlab/experiment.hpp"

namespace fl = frictionlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPolicy = 3;
constexpr int kExitDiagnostics = 4;

int run_simulate(const std::string& out, double v, double a, double beta, double z,
                 double sigma, double t0, std::size_t n, std::uint64_t seed,
                 double ai_rate, const std::string& condition, double dt) {
    fl::DdmParams params{v, a, z >= 0.0 ? z : beta * a, sigma, t0};
    const fl::TrialSet set = fl::simulate_dataset(params, n, condition, ai_rate, seed, dt);
    fl::write_trialset_csv(set, out);
    std::size_t accepts = 0;
    for (const auto& tr : set.trials) accepts += tr.choice == fl::Choice::Accept ? 1 : 0;
    std::printf("wrote %zu trials to %s (accept share %.4f, closed-form %.4f)\n",
                set.trials.size(), out.c_str(),
                static_cast<double>(accepts) / static_cast<double>(set.trials.size()),
                fl::accept_probability(params));
    return kExitOk;
}

int run_fit(const std::string& trials_path, const std::string& out,
            const std::string& chains_out, std::uint64_t seed, double a, double sigma,
            double t0, int warmup, int samples, std::size_t min_trials) {
    fl::TrialSet set = fl::read_trials_csv(trials_path);
    fl::FitConfig cfg;
    cfg.seed = seed;
    cfg.fixed = fl::FixedDdm{a, sigma, t0};
    cfg.warmup = warmup;
    cfg.samples = samples;
    cfg.min_trials = min_trials;
    const fl::SubjectPosterior post = fl::fit_subject(set, fl::Priors{}, cfg);

    std::ofstream js(out, std::ios::binary);
    if (!js) throw fl::IoError("cannot open for writing", out);
    js << fl::to_json(post).dump(2) << "\n";
    if (!chains_out.empty()) fl::write_chains_csv(post, chains_out);

    const fl::DecoupleReport rep = fl::decouple_report(post);
    std::printf("v    : mean %.4f  sd %.4f  95%% [%.4f, %.4f]  ess %.0f\n", post.v.mean,
                post.v.sd, post.v.ci_lo, post.v.ci_hi, post.ess_v);
    std::printf("beta : mean %.4f  sd %.4f  95%% [%.4f, %.4f]  ess %.0f\n", post.beta.mean,
                post.beta.sd, post.beta.ci_lo, post.beta.ci_hi, post.ess_beta);
    std::printf("acceptance %.3f; verdict: %s (bias index %.3f, effort index %.3f)\n",
                post.acceptance_rate, fl::decouple_verdict_name(rep.verdict), rep.bias_index,
                rep.effort_index);
    return kExitOk;
}

int run_experiment_cmd(const std::string& preset, const std::string& config_path,
                       std::uint64_t seed, bool seed_given, const std::string& out_dir,
                       unsigned threads) {
    fl::KeyValueConfig kv;
    if (!config_path.empty()) kv = fl::KeyValueConfig::parse_file(config_path);
    if (!preset.empty()) kv.set("preset", preset);
    fl::ExperimentConfig cfg = fl::ExperimentConfig::from_kv(kv);
    if (seed_given) {
        cfg.seed = seed;
        cfg.seed_set = true;
    }
    cfg.threads = threads;
    cfg.out_dir = out_dir;

    const fl::RunOutput out = fl::run_experiment(cfg);
    const auto paths = fl::report(out, out_dir);
    std::printf("preset %s seed %llu: verdict %s (%.0f ms)\n", out.summary.preset.c_str(),
                static_cast<unsigned long long>(out.summary.seed),
                out.summary.verdicts.pass ? "PASS" : "FAIL", out.summary.wall_ms);
    for (const auto& [name, state] : out.summary.verdicts.checks)
        std::printf("  %-32s %s\n", name.c_str(), state.c_str());
    for (const std::string& note : out.summary.verdicts.notes)
        std::printf("  note: %s\n", note.c_str());
    for (const std::string& p : paths) std::printf("wrote %s\n", p.c_str());
    return kExitOk;
}

int run_report(const std::string& run_dir) {
    const fl::RecomputeResult res = fl::recompute_from_dir(run_dir);
    const auto paths = fl::report(fl::RunOutput{res.summary, {}}, run_dir + "/recomputed");
    std::printf("recomputed verdict: %s\n", res.summary.verdicts.pass ? "PASS" : "FAIL");
    for (const auto& [name, state] : res.summary.verdicts.checks)
        std::printf("  %-32s %s\n", name.c_str(), state.c_str());
    for (const std::string& p : paths) std::printf("wrote %s\n", p.c_str());
    if (!res.matches) {
        for (const std::string& m : res.mismatches)
            std::fprintf(stderr, "mismatch: %s\n", m.c_str());
        return kExitConfig;
    }
    std::printf("stored summary matches the recomputation\n");
    return kExitOk;
}

int run_policy_check(const std::string& domain, const std::string& condition) {
    const fl::DomainClass d = fl::parse_domain(domain);
    const fl::AdviceCondition c = fl::parse_condition(condition);
    fl::enforce_policy(d, c);  // throws PolicyViolationError when denied
    std::printf("allowed: condition '%s' in domain '%s'\n", fl::condition_name(c),
                fl::domain_name(d));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frictionlab: drift-diffusion decision lab with simulated AI advice"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a raw trial set to CSV");
    double v = 1.0, a = 2.0, beta = 0.5, z = -1.0, sigma = 1.0, t0 = 0.3;
    double ai_rate = 0.7, dt = fl::kDefaultDt;
    std::size_t n = 1000;
    std::uint64_t sim_seed = 1;
    std::string sim_out = "trials.csv", condition = "manual";
    sim->add_option("--v", v, "drift rate");
    sim->add_option("--a", a, "boundary separation");
    sim->add_option("--beta", beta, "relative start (z/a)");
    sim->add_option("--z", z, "absolute start (overrides --beta)");
    sim->add_option("--sigma", sigma, "diffusion coefficient");
    sim->add_option("--t0", t0, "non-decision time");
    sim->add_option("--n", n, "trial count");
    sim->add_option("--seed", sim_seed, "root seed")->required();
    sim->add_option("--ai-correct-rate", ai_rate, "P(AI recommendation is correct)");
    sim->add_option("--condition", condition, "condition tag");
    sim->add_option("--dt", dt, "integration step (s)");
    sim->add_option("--out", sim_out, "output CSV path");

    // fit
    auto* fit = app.add_subcommand("fit", "fit (v, beta) posterior from a trial CSV");
    std::string fit_trials, fit_out = "posterior.json", chains_out;
    std::uint64_t fit_seed = 1;
    double fit_a = 2.0, fit_sigma = 1.0, fit_t0 = 0.3;
    int warmup = 1500, samples = 3000;
    std::size_t min_trials = 50;
    fit->add_option("--trials", fit_trials, "input CSV with choice,rt columns")->required();
    fit->add_option("--out", fit_out, "posterior JSON path");
    fit->add_option("--chains-out", chains_out, "optional raw chain CSV path");
    fit->add_option("--seed", fit_seed, "sampler seed")->required();
    fit->add_option("--a", fit_a, "fixed boundary separation");
    fit->add_option("--sigma", fit_sigma, "fixed diffusion coefficient");
    fit->add_option("--t0", fit_t0, "fixed non-decision time");
    fit->add_option("--warmup", warmup, "adaptation iterations");
    fit->add_option("--samples", samples, "retained draws");
    fit->add_option("--min-trials", min_trials, "trial-count floor");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a preset experiment");
    std::string preset, config_path, exp_out = "run";
    std::uint64_t exp_seed = 0;
    unsigned threads = 1;
    auto* preset_opt =
        exp->add_option("--preset", preset, "h1 | h2 | h3 (overrides config)");
    exp->add_option("--config", config_path, "key=value config file");
    auto* seed_opt = exp->add_option("--seed", exp_seed, "root seed (overrides config)");
    exp->add_option("--out", exp_out, "output directory");
    exp->add_option("--threads", threads, "worker threads (1 = serial)");
    (void)preset_opt;

    // report
    auto* rep = app.add_subcommand("report", "recompute verdicts and plot data from a run");
    std::string run_dir;
    rep->add_option("--run", run_dir, "run directory (summary.json + trials.csv)")->required();

    // policy-check
    auto* pol = app.add_subcommand("policy-check", "check a condition against a domain class");
    std::string domain, pol_condition;
    pol->add_option("--domain", domain, "high-stakes | time-critical | low-risk")->required();
    pol->add_option("--condition", pol_condition, "consensus | friction")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed())
            return run_simulate(sim_out, v, a, beta, z, sigma, t0, n, sim_seed, ai_rate,
                                condition, dt);
        if (fit->parsed())
            return run_fit(fit_trials, fit_out, chains_out, fit_seed, fit_a, fit_sigma,
                           fit_t0, warmup, samples, min_trials);
        if (exp->parsed())
            return run_experiment_cmd(preset, config_path, exp_seed, !seed_opt->empty(),
                                      exp_out, threads);
        if (rep->parsed()) return run_report(run_dir);
        if (pol->parsed()) return run_policy_check(domain, pol_condition);
    } catch (const fl::PolicyViolationError& e) {
        std::fprintf(stderr, "policy violation: %s\n  rationale: %s\n", e.what(),
                     e.rationale().c_str());
        return kExitPolicy;
    } catch (const fl::DiagnosticsError& e) {
        std::fprintf(stderr, "diagnostics failure: %s\n", e.what());
        return kExitDiagnostics;
    } catch (const fl::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
