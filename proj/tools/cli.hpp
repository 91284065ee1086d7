#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyninfer/dp_solver.hpp"
#include "dyninfer/io.hpp"
#include "dyninfer/model.hpp"
#include "dyninfer/oracle.hpp"
#include "dyninfer/reduction.hpp"
#include "dyninfer/strategy_eval.hpp"
#include "dyninfer/trellis.hpp"
#include "dyninfer/worked_examples.hpp"

namespace dyninfer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::ParseError, "cannot write '" + path + "'");
    f << text;
}

/// "uniform", a single label (point mass), or "a=0.25,b=0.75".
inline Distribution parse_init(const Problem& p, const std::string& spec) {
    const std::size_t nx = p.num_x();
    if (spec == "uniform") return Distribution(nx, 1.0 / static_cast<double>(nx));
    if (spec.find('=') == std::string::npos) return point_mass(nx, p.x_space().index(spec));
    Distribution d(nx, 0.0);
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) fail(ErrorKind::ParseError, "bad --init entry '" + item + "'");
        try {
            d[p.x_space().index(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
        } catch (const std::logic_error&) {
            fail(ErrorKind::ParseError, "bad --init probability in '" + item + "'");
        }
    }
    return d;
}

inline Problem load_with_init(const std::string& model, const std::string& init) {
    Problem p = io::load_problem(model);
    if (!init.empty()) p = p.with_init(parse_init(p, init));
    return p;
}

inline TieBreakRule parse_rule(const std::string& s) {
    return s == "first" ? TieBreakRule::FirstIndex : TieBreakRule::MyopicPreferred;
}

inline MarkovStrategy load_strategy(const Problem& p, const std::string& file, const std::string& builtin) {
    if (!file.empty()) return io::strategy_from_json(p, io::parse_json_text(io::read_text(file)));
    if (builtin == "myopic") return MarkovStrategy::myopic(p);
    return MarkovStrategy::optimal(solve(p));
}

inline std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> grid;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            grid.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            fail(ErrorKind::InvalidParams, "bad grid value '" + item + "'");
        }
    }
    return grid;
}

} // namespace detail

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics to `err`; returns the process exit status.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dynamic inference toolkit: solve, evaluate and verify finite dynamic-inference models", "dyninfer"};
    app.require_subcommand(1);

    std::string model, output = "-", init, tie_break = "myopic", strategy_file, policy = "optimal";

    auto add_model = [&](CLI::App* sub) { sub->add_option("-m,--model", model, "model JSON file ('-' for stdin)")->required(); };
    auto add_output = [&](CLI::App* sub) { sub->add_option("-o,--output", output, "output file ('-' for stdout)"); };
    auto add_init = [&](CLI::App* sub) {
        sub->add_option("--init", init, "initial distribution override: 'uniform', a label, or 'a=p,b=q'");
    };
    auto add_tie = [&](CLI::App* sub) {
        sub->add_option("--tie-break", tie_break, "tie-breaking rule")->check(CLI::IsMember({"myopic", "first"}));
    };
    auto add_strategy = [&](CLI::App* sub) {
        sub->add_option("-s,--strategy", strategy_file, "strategy JSON file");
        sub->add_option("--policy", policy, "built-in strategy when no file is given")->check(CLI::IsMember({"optimal", "myopic"}));
    };

    auto* solve_cmd = app.add_subcommand("solve", "backward induction; writes V*, Q*, policy and ties as JSON");
    add_model(solve_cmd);
    add_output(solve_cmd);
    add_init(solve_cmd);
    add_tie(solve_cmd);

    auto* eval_cmd = app.add_subcommand("evaluate", "exact inference loss and loss-to-go of a Markov strategy");
    add_model(eval_cmd);
    add_output(eval_cmd);
    add_init(eval_cmd);
    add_strategy(eval_cmd);

    std::uint64_t rollouts = 10'000, seed = 0;
    std::size_t keep = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo rollouts of a Markov strategy");
    add_model(sim_cmd);
    add_output(sim_cmd);
    add_init(sim_cmd);
    add_strategy(sim_cmd);
    sim_cmd->add_option("--rollouts", rollouts, "number of rollouts")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", seed, "master seed")->envname("DYNINFER_SEED");
    sim_cmd->add_option("--trajectories", keep, "also emit up to this many sampled trajectories");

    std::string mode = "revealed", method = "enumerate";
    std::uint64_t limit = kDefaultStrategyLimit, pair_limit = kDefaultPairLimit, instances = 0;
    int random_n = 2;
    bool lemma1 = false;
    auto* verify_cmd = app.add_subcommand("verify", "brute-force optimum over history-dependent strategies vs. the DP optimum");
    verify_cmd->add_option("-m,--model", model, "model JSON file");
    add_output(verify_cmd);
    verify_cmd->add_option("--mode", mode, "what the strategies see")->check(CLI::IsMember({"revealed", "unrevealed"}));
    verify_cmd->add_option("--method", method, "search method")->check(CLI::IsMember({"enumerate", "tree"}));
    verify_cmd->add_option("--limit", limit, "maximum number of strategies to enumerate");
    verify_cmd->add_option("--pair-limit", pair_limit, "maximum strategy-trajectory pairs (or history nodes for tree)");
    verify_cmd->add_option("--instances", instances, "number of random binary instances instead of a model");
    verify_cmd->add_option("--seed", seed, "seed for random instances")->envname("DYNINFER_SEED");
    verify_cmd->add_option("--n", random_n, "horizon of random instances")->check(CLI::Range(1, 8));
    verify_cmd->add_flag("--lemma1", lemma1, "record (E sum l, E sum lbar) for every enumerated strategy");

    std::string format = "dot";
    auto* trellis_cmd = app.add_subcommand("export-trellis", "unrolled transition diagram with V* and chosen estimates");
    add_model(trellis_cmd);
    add_output(trellis_cmd);
    add_tie(trellis_cmd);
    trellis_cmd->add_option("-f,--format", format, "output format")->check(CLI::IsMember({"dot", "text"}));

    auto* export_cmd = app.add_subcommand("export", "export derived tables");
    export_cmd->require_subcommand(1);
    auto* barloss_cmd = export_cmd->add_subcommand("bar-loss", "observation-estimate loss table as CSV");
    add_model(barloss_cmd);
    add_output(barloss_cmd);

    std::string example_name;
    std::optional<int> example_n;
    examples::YieldParams yield;
    std::string grid, planner = "persist";
    auto* example_cmd = app.add_subcommand("example", "write a built-in model as JSON");
    example_cmd->add_option("name", example_name, "section33 | stock | yield")->required()->check(CLI::IsMember({"section33", "stock", "yield"}));
    example_cmd->add_option("--n", example_n, "horizon (default 6, or 4 for yield)");
    add_output(example_cmd);
    example_cmd->add_option("--beta", yield.beta, "yield: logistic slope");
    example_cmd->add_option("--dc", yield.d_c, "yield: critical distance");
    example_cmd->add_option("--grid", grid, "yield: comma-separated distance grid");
    example_cmd->add_option("--c-missed", yield.c_missed, "yield: missed-chance loss per meter");
    example_cmd->add_option("--c-danger", yield.c_danger, "yield: dangerous-prediction loss scale");
    example_cmd->add_option("--planner", planner, "yield: planner style")->check(CLI::IsMember({"persist", "fallback"}));
    example_cmd->add_option("--p-move", yield.p_move, "yield: probability that the gap moves");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (solve_cmd->parsed()) {
            const Problem p = detail::load_with_init(model, init);
            const SolveResult r = solve(p, detail::parse_rule(tie_break));
            detail::write_output(output, io::dump(io::solve_result_to_json(r, minimum_inference_loss(p, r))), out);
        } else if (eval_cmd->parsed()) {
            const Problem p = detail::load_with_init(model, init);
            const EvalResult r = evaluate_markov(p, detail::load_strategy(p, strategy_file, policy));
            detail::write_output(output, io::dump(io::eval_result_to_json(r)), out);
        } else if (sim_cmd->parsed()) {
            const Problem p = detail::load_with_init(model, init);
            SimulationOptions opts;
            opts.keep_trajectories = keep > 0;
            opts.trajectory_cap = keep;
            const SimulationResult r = simulate(p, detail::load_strategy(p, strategy_file, policy), rollouts, seed, opts);
            io::json j = io::simulation_to_json(r);
            if (keep > 0) {
                io::json ts = io::json::array();
                for (const auto& t : r.trajectories) {
                    io::json xs = io::json::array(), ys = io::json::array(), as = io::json::array();
                    for (std::size_t k = 0; k < t.xs.size(); ++k) {
                        xs.push_back(p.x_space().label(t.xs[k]));
                        ys.push_back(p.y_space().label(t.ys[k]));
                        as.push_back(p.yhat_space().label(t.yhats[k]));
                    }
                    ts.push_back({{"rollout", t.rollout}, {"xs", xs}, {"ys", ys}, {"yhats", as}, {"loss", io::round_sig(t.loss)}});
                }
                j["trajectories"] = std::move(ts);
            }
            detail::write_output(output, io::dump(j), out);
        } else if (verify_cmd->parsed()) {
            if (model.empty() == (instances == 0)) {
                err << "usage error: verify needs exactly one of --model or --instances\n";
                return kExitUsage;
            }
            OracleOptions opts;
            opts.mode = mode == "unrevealed" ? HistoryMode::Unrevealed : HistoryMode::Revealed;
            opts.method = method == "tree" ? SearchMethod::HistoryTree : SearchMethod::Enumerate;
            opts.limit = limit;
            opts.pair_limit = pair_limit;
            opts.record_lemma1 = lemma1;

            std::vector<Problem> problems;
            if (!model.empty()) {
                problems.push_back(io::load_problem(model));
            } else {
                SplitMix64 rng(seed);
                for (std::uint64_t k = 0; k < instances; ++k) problems.push_back(random_problem({random_n, 2, 2, 2}, rng));
            }
            std::string text;
            double gap_max = 0.0;
            for (const auto& p : problems) {
                const OracleReport r = brute_force_optimum(p, opts);
                gap_max = std::max(gap_max, std::abs(r.gap));
                text += io::oracle_report_to_json(p, r).dump() + "\n";
            }
            const bool pass = gap_max <= 1e-9;
            text += std::string(pass ? "PASS" : "FAIL") + " gap_max=" + io::format_sig(gap_max) + "\n";
            detail::write_output(output, text, out);
            return pass ? kExitOk : kExitDomainError;
        } else if (trellis_cmd->parsed()) {
            const Problem p = io::load_problem(model);
            const SolveResult r = solve(p, detail::parse_rule(tie_break));
            detail::write_output(output, export_trellis(p, r, format == "text" ? TrellisFormat::Text : TrellisFormat::Dot), out);
        } else if (barloss_cmd->parsed()) {
            const Problem p = io::load_problem(model);
            detail::write_output(output, io::bar_loss_csv(p, bar_loss_table(p)), out);
        } else if (example_cmd->parsed()) {
            Problem p = [&] {
                if (example_name == "section33") return examples::example_section33(example_n.value_or(6));
                if (example_name == "stock") return examples::example_stock(example_n.value_or(6));
                if (!grid.empty()) yield.grid = detail::parse_grid(grid);
                yield.planner = planner == "fallback" ? examples::Planner::FallBack : examples::Planner::Persist;
                return examples::example_yield(example_n.value_or(4), yield);
            }();
            detail::write_output(output, io::dump(io::problem_to_json(p)), out);
        }
    } catch (const Error& e) {
        err << io::json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump(-1, ' ', false, io::json::error_handler_t::replace) << "\n";
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << io::json{{"error", "Internal"}, {"message", e.what()}}.dump(-1, ' ', false, io::json::error_handler_t::replace) << "\n";
        return kExitDomainError;
    }
    return kExitOk;
}

} // namespace dyninfer::cli
