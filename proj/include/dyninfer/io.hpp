#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyninfer/dp_solver.hpp"
#include "dyninfer/model.hpp"
#include "dyninfer/oracle.hpp"
#include "dyninfer/reduction.hpp"
#include "dyninfer/strategy_eval.hpp"

// JSON and CSV formats. Objects are emitted with sorted keys and every real
// number is rounded to 12 significant digits, so output bytes depend only on
// the values.

namespace dyninfer::io {

using json = nlohmann::json;

inline double round_sig(double v, int digits = 12) {
    if (v == 0.0) return 0.0;
    if (!std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
    return std::strtod(buf, nullptr);
}

inline std::string format_sig(double v, int digits = 12) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v == 0.0 ? 0.0 : v);
    return buf;
}

inline std::string format_fixed(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Model files

namespace detail {

inline const json& require(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) fail(ErrorKind::ParseError, std::string("missing key '") + key + "'");
    return obj.at(key);
}

inline std::vector<std::string> parse_labels(const json& j, const char* key) {
    const json& arr = require(j, key);
    if (!arr.is_array()) fail(ErrorKind::ParseError, std::string("'") + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : arr) {
        if (!e.is_string()) fail(ErrorKind::ParseError, std::string("'") + key + "' must be an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

inline double parse_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(ErrorKind::ParseError, where + ": expected a number");
    return v.get<double>();
}

/// Object label -> number over `space`; omitted labels are zero.
inline Distribution parse_distribution(const json& obj, const Alphabet& space, const std::string& where) {
    if (!obj.is_object()) fail(ErrorKind::ParseError, where + ": expected an object of label -> probability");
    Distribution d(space.size(), 0.0);
    for (const auto& [label, value] : obj.items()) {
        if (!space.contains(label)) fail(ErrorKind::UnknownLabel, where + ": unknown label '" + label + "'");
        d[space.index(label)] = parse_number(value, where);
    }
    return d;
}

inline json distribution_json(const Distribution& d, const Alphabet& space) {
    json obj = json::object();
    for (std::size_t k = 0; k < space.size(); ++k) obj[space.label(k)] = round_sig(d[k]);
    return obj;
}

inline std::string transition_key(const std::string& x, const std::string& yhat) { return x + "|" + yhat; }

} // namespace detail

inline Problem problem_from_json(const json& j) {
    try {
        if (!j.is_object()) fail(ErrorKind::ParseError, "model must be a JSON object");
        const json& jn = detail::require(j, "n");
        if (!jn.is_number_integer()) fail(ErrorKind::ParseError, "'n' must be an integer");
        const int n = jn.get<int>();

        ProblemData d;
        d.n = n;
        d.x_space = detail::parse_labels(j, "x_space");
        d.y_space = detail::parse_labels(j, "y_space");
        d.yhat_space = detail::parse_labels(j, "yhat_space");
        for (const auto& l : d.x_space)
            if (l.find('|') != std::string::npos) fail(ErrorKind::ParseError, "observation label '" + l + "' contains '|'");
        const Alphabet xs(d.x_space), ys(d.y_space), as(d.yhat_space);

        const bool stationary = j.contains("stationary") && j.at("stationary").is_boolean() && j.at("stationary").get<bool>();

        d.init = detail::parse_distribution(detail::require(j, "init"), xs, "init");

        const json& jt = detail::require(j, "transitions");
        const json& jq = detail::require(j, "quantities");
        if (!jt.is_array() || !jq.is_array()) fail(ErrorKind::ParseError, "'transitions' and 'quantities' must be arrays");

        std::vector<std::vector<Distribution>> transitions;
        for (std::size_t k = 0; k < jt.size(); ++k) {
            const std::string where = "transitions[" + std::to_string(k) + "]";
            const json& obj = jt[k];
            if (!obj.is_object()) fail(ErrorKind::ParseError, where + ": expected an object");
            std::vector<Distribution> rows;
            for (std::size_t x = 0; x < xs.size(); ++x) {
                for (std::size_t a = 0; a < as.size(); ++a) {
                    const std::string key = detail::transition_key(xs.label(x), as.label(a));
                    if (!obj.contains(key)) fail(ErrorKind::DimensionMismatch, where + ": missing row '" + key + "'");
                    rows.push_back(detail::parse_distribution(obj.at(key), xs, where + "[" + key + "]"));
                }
            }
            for (const auto& [key, value] : obj.items()) {
                const auto bar = key.find('|');
                if (bar == std::string::npos || !xs.contains(key.substr(0, bar)) || !as.contains(key.substr(bar + 1)))
                    fail(ErrorKind::UnknownLabel, where + ": unknown row key '" + key + "'");
            }
            transitions.push_back(std::move(rows));
        }

        std::vector<std::vector<Distribution>> quantities;
        for (std::size_t k = 0; k < jq.size(); ++k) {
            const std::string where = "quantities[" + std::to_string(k) + "]";
            const json& obj = jq[k];
            if (!obj.is_object()) fail(ErrorKind::ParseError, where + ": expected an object");
            std::vector<Distribution> rows;
            for (std::size_t x = 0; x < xs.size(); ++x) {
                if (!obj.contains(xs.label(x))) fail(ErrorKind::DimensionMismatch, where + ": missing row '" + xs.label(x) + "'");
                rows.push_back(detail::parse_distribution(obj.at(xs.label(x)), ys, where + "[" + xs.label(x) + "]"));
            }
            for (const auto& [key, value] : obj.items())
                if (!xs.contains(key)) fail(ErrorKind::UnknownLabel, where + ": unknown row key '" + key + "'");
            quantities.push_back(std::move(rows));
        }

        if (stationary) {
            if (jq.size() != 1 || jt.size() > 1 || (jt.empty() && n > 1))
                fail(ErrorKind::HorizonMismatch, "stationary model needs exactly one quantity kernel and one transition kernel");
            if (n < 1) fail(ErrorKind::HorizonMismatch, "horizon must be at least 1");
            d.quantities.assign(static_cast<std::size_t>(n), quantities.front());
            if (n > 1) d.transitions.assign(static_cast<std::size_t>(n - 1), transitions.front());
        } else {
            d.transitions = std::move(transitions);
            d.quantities = std::move(quantities);
        }

        const json& jl = detail::require(j, "loss");
        if (!jl.is_array()) fail(ErrorKind::ParseError, "'loss' must be an array of records");
        const std::size_t total = xs.size() * ys.size() * as.size();
        d.loss.assign(total, 0.0);
        std::vector<bool> seen(total, false);
        for (const auto& rec : jl) {
            if (!rec.is_object()) fail(ErrorKind::ParseError, "loss records must be objects");
            auto label = [&](const char* key) {
                const json& v = detail::require(rec, key);
                if (!v.is_string()) fail(ErrorKind::ParseError, std::string("loss.") + key + " must be a string");
                return v.get<std::string>();
            };
            const std::size_t x = xs.index(label("x"));
            const std::size_t y = ys.index(label("y"));
            const std::size_t a = as.index(label("yhat"));
            const std::size_t idx = (x * ys.size() + y) * as.size() + a;
            if (seen[idx]) fail(ErrorKind::ParseError, "duplicate loss record");
            seen[idx] = true;
            d.loss[idx] = detail::parse_number(detail::require(rec, "value"), "loss.value");
        }
        for (std::size_t idx = 0; idx < total; ++idx)
            if (!seen[idx]) fail(ErrorKind::DimensionMismatch, "loss table is missing " + std::to_string(total - static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true))) + " triple(s)");

        return validate_problem(std::move(d));
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, e.what());
    }
}

inline json problem_to_json(const Problem& p) {
    json j;
    j["n"] = p.horizon();
    j["x_space"] = p.x_space().labels();
    j["y_space"] = p.y_space().labels();
    j["yhat_space"] = p.yhat_space().labels();
    j["init"] = detail::distribution_json(p.init(), p.x_space());
    json transitions = json::array();
    for (const auto& t : p.transitions()) {
        json obj = json::object();
        for (std::size_t x = 0; x < p.num_x(); ++x)
            for (std::size_t a = 0; a < p.num_yhat(); ++a)
                obj[detail::transition_key(p.x_space().label(x), p.yhat_space().label(a))] = detail::distribution_json(t.row(x, a), p.x_space());
        transitions.push_back(std::move(obj));
    }
    j["transitions"] = std::move(transitions);
    json quantities = json::array();
    for (const auto& q : p.quantities()) {
        json obj = json::object();
        for (std::size_t x = 0; x < p.num_x(); ++x) obj[p.x_space().label(x)] = detail::distribution_json(q.rows[x], p.y_space());
        quantities.push_back(std::move(obj));
    }
    j["quantities"] = std::move(quantities);
    json loss = json::array();
    for (std::size_t x = 0; x < p.num_x(); ++x)
        for (std::size_t y = 0; y < p.num_y(); ++y)
            for (std::size_t a = 0; a < p.num_yhat(); ++a)
                loss.push_back({{"x", p.x_space().label(x)}, {"y", p.y_space().label(y)}, {"yhat", p.yhat_space().label(a)},
                                {"value", round_sig(p.loss()(x, y, a))}});
    j["loss"] = std::move(loss);
    return j;
}

inline json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, e.what());
    }
}

/// Reads a whole file, or standard input for "-".
inline std::string read_text(const std::string& path) {
    std::ostringstream ss;
    if (path == "-") {
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
    ss << in.rdbuf();
    return ss.str();
}

inline Problem load_problem(const std::string& path) { return problem_from_json(parse_json_text(read_text(path))); }

// ---------------------------------------------------------------------------
// Strategies and results

inline json strategy_to_json(const Problem& p, const MarkovStrategy& s) {
    check_strategy_shape(p, s);
    json policy = json::array();
    for (int i = 1; i <= p.horizon(); ++i) {
        json row = json::object();
        for (std::size_t x = 0; x < p.num_x(); ++x) row[p.x_space().label(x)] = p.yhat_space().label(s(i, x));
        policy.push_back(std::move(row));
    }
    return json{{"policy", std::move(policy)}};
}

inline MarkovStrategy strategy_from_json(const Problem& p, const json& j) {
    try {
        const json& policy = detail::require(j, "policy");
        if (!policy.is_array() || policy.size() != static_cast<std::size_t>(p.horizon()))
            fail(ErrorKind::ShapeMismatch, "policy must list one object per round (" + std::to_string(p.horizon()) + ")");
        MarkovStrategy s = MarkovStrategy::constant(p, 0);
        for (int i = 1; i <= p.horizon(); ++i) {
            const json& row = policy[static_cast<std::size_t>(i - 1)];
            if (!row.is_object()) fail(ErrorKind::ParseError, "policy rows must be objects");
            for (std::size_t x = 0; x < p.num_x(); ++x) {
                const std::string& label = p.x_space().label(x);
                if (!row.contains(label))
                    fail(ErrorKind::ShapeMismatch, "policy round " + std::to_string(i) + " has no entry for '" + label + "'");
                const json& v = row.at(label);
                if (!v.is_string()) fail(ErrorKind::ParseError, "policy entries must be estimate labels");
                s(i, x) = p.yhat_space().index(v.get<std::string>());
            }
        }
        return s;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, e.what());
    }
}

inline std::string to_string(TieBreakRule rule) { return rule == TieBreakRule::MyopicPreferred ? "myopic" : "first"; }
inline std::string to_string(HistoryMode mode) { return mode == HistoryMode::Revealed ? "revealed" : "unrevealed"; }
inline std::string to_string(SearchMethod m) { return m == SearchMethod::Enumerate ? "enumerate" : "tree"; }

inline json solve_result_to_json(const SolveResult& r, double min_loss) {
    json v = json::array(), q = json::array(), policy = json::array(), ties = json::array();
    for (int i = 1; i <= r.n; ++i) {
        json vr = json::object(), qr = json::object(), pr = json::object(), tr = json::object();
        for (std::size_t x = 0; x < r.num_x(); ++x) {
            const std::string& xl = r.x_space.label(x);
            vr[xl] = round_sig(r.v(i, x));
            json qa = json::object();
            for (std::size_t a = 0; a < r.num_yhat(); ++a) qa[r.yhat_space.label(a)] = round_sig(r.q(i, x, a));
            qr[xl] = std::move(qa);
            pr[xl] = r.yhat_space.label(r.action(i, x));
            json ta = json::array();
            for (std::size_t a : r.ties(i, x)) ta.push_back(r.yhat_space.label(a));
            tr[xl] = std::move(ta);
        }
        v.push_back(std::move(vr));
        q.push_back(std::move(qr));
        policy.push_back(std::move(pr));
        ties.push_back(std::move(tr));
    }
    return json{{"v_star", std::move(v)}, {"q_star", std::move(q)}, {"policy", std::move(policy)},
                {"ties", std::move(ties)}, {"min_loss", round_sig(min_loss)}, {"tie_break", to_string(r.rule)}};
}

inline json eval_result_to_json(const EvalResult& r) {
    json v = json::array();
    for (int i = 1; i <= r.n; ++i) {
        json row = json::object();
        for (std::size_t x = 0; x < r.num_x; ++x) row[r.x_space.label(x)] = round_sig(r(i, x));
        v.push_back(std::move(row));
    }
    return json{{"j", round_sig(r.j)}, {"v", std::move(v)}};
}

inline json simulation_to_json(const SimulationResult& r) {
    return json{{"mean", round_sig(r.mean)}, {"var", round_sig(r.variance)}, {"rollouts", r.rollouts}, {"seed", r.seed}};
}

inline json history_strategy_to_json(const Problem& p, const HistoryStrategy& s) {
    json tables = json::array();
    for (const auto& t : s.tables) {
        json row = json::array();
        for (std::size_t a : t) row.push_back(a == HistoryStrategy::kUnset ? json(nullptr) : json(p.yhat_space().label(a)));
        tables.push_back(std::move(row));
    }
    return json{{"mode", to_string(s.mode)}, {"tables", std::move(tables)}};
}

inline json oracle_report_to_json(const Problem& p, const OracleReport& r) {
    json pairs = json::array();
    for (const auto& pr : r.lemma1_pairs) pairs.push_back(json::array({round_sig(pr.lhs), round_sig(pr.rhs)}));
    return json{{"brute_min", round_sig(r.brute_min)},
                {"dp_min", round_sig(r.dp_min)},
                {"gap", round_sig(r.gap)},
                {"mode", to_string(r.mode)},
                {"method", to_string(r.method)},
                {"search_space", r.search_space.to_string()},
                {"strategies_searched", r.strategies_searched},
                {"history_nodes", r.history_nodes},
                {"witness", history_strategy_to_json(p, r.witness)},
                {"lemma1_pairs", std::move(pairs)}};
}

/// CSV with header `round,x,yhat,value`, values at 12 significant digits.
inline std::string bar_loss_csv(const Problem& p, const BarLossTable& table) {
    std::string out = "round,x,yhat,value\n";
    for (int i = 1; i <= p.horizon(); ++i)
        for (std::size_t x = 0; x < p.num_x(); ++x)
            for (std::size_t a = 0; a < p.num_yhat(); ++a)
                out += std::to_string(i) + "," + p.x_space().label(x) + "," + p.yhat_space().label(a) + "," + format_sig(table(i, x, a)) + "\n";
    return out;
}

} // namespace dyninfer::io
