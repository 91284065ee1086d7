#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dyninfer/dp_solver.hpp"
#include "dyninfer/io.hpp"
#include "dyninfer/model.hpp"

namespace dyninfer {

/// Unrolled round-by-round transition diagram annotated with V* and the
/// chosen estimates.
struct TrellisDocument {
    struct Node {
        int round = 0;
        std::size_t x = 0;
        double v_star = 0.0;
        std::size_t chosen = 0;
        std::size_t myopic = 0;
        bool tie = false;
    };
    struct Edge {
        int round = 0; // source round; target is round + 1
        std::size_t x = 0;
        std::size_t yhat = 0;
        std::size_t x_next = 0;
        double probability = 0.0;
        bool chosen = false;
        bool deviation = false; // chosen and different from the myopic estimate
    };

    Alphabet x_space;
    Alphabet yhat_space;
    int n = 0;
    std::vector<Node> nodes;
    std::vector<Edge> edges;
};

inline TrellisDocument build_trellis(const Problem& problem, const SolveResult& result) {
    detail::check_result_matches(problem, result);
    TrellisDocument doc;
    doc.x_space = problem.x_space();
    doc.yhat_space = problem.yhat_space();
    doc.n = problem.horizon();
    for (int i = 1; i <= doc.n; ++i) {
        for (std::size_t x = 0; x < problem.num_x(); ++x) {
            const std::size_t chosen = result.action(i, x);
            const std::size_t myopic = result.myopic_action(i, x);
            doc.nodes.push_back({i, x, result.v(i, x), chosen, myopic, result.ties(i, x).size() > 1});
            if (i == doc.n) continue;
            for (std::size_t a = 0; a < problem.num_yhat(); ++a) {
                const Distribution& next = problem.transition(i + 1).row(x, a);
                for (std::size_t x2 = 0; x2 < problem.num_x(); ++x2) {
                    if (next[x2] <= 0.0) continue;
                    doc.edges.push_back({i, x, a, x2, next[x2], a == chosen, a == chosen && chosen != myopic});
                }
            }
        }
    }
    return doc;
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

inline std::string node_id(int round, std::size_t x) { return "r" + std::to_string(round) + "_x" + std::to_string(x); }

} // namespace detail

inline std::string render_dot(const TrellisDocument& doc) {
    std::string out = "digraph trellis {\n  rankdir=LR;\n  node [shape=circle];\n";
    for (int i = 1; i <= doc.n; ++i) {
        out += "  subgraph round_" + std::to_string(i) + " {\n    rank=same;\n";
        for (const auto& node : doc.nodes) {
            if (node.round != i) continue;
            out += "    " + detail::node_id(i, node.x) + " [label=\"x=" + detail::dot_escape(doc.x_space.label(node.x)) +
                   "\\nV*=" + io::format_fixed(node.v_star, 4) + "\"];\n";
        }
        out += "  }\n";
    }
    for (const auto& e : doc.edges) {
        out += "  " + detail::node_id(e.round, e.x) + " -> " + detail::node_id(e.round + 1, e.x_next) + " [label=\"" +
               detail::dot_escape(doc.yhat_space.label(e.yhat));
        if (e.probability < 1.0) out += " p=" + io::format_fixed(e.probability, 4);
        out += "\", style=";
        out += e.chosen ? "solid" : "dashed";
        if (e.deviation) out += ", color=blue";
        out += "];\n";
    }
    out += "}\n";
    return out;
}

inline std::string render_text(const TrellisDocument& doc) {
    std::string out = "round\tx\tV*\tyhat*\tmyopic\ttie\n";
    for (const auto& node : doc.nodes) {
        out += std::to_string(node.round) + "\t" + doc.x_space.label(node.x) + "\t" + io::format_fixed(node.v_star, 4) + "\t" +
               doc.yhat_space.label(node.chosen) + "\t" + doc.yhat_space.label(node.myopic) + "\t" + (node.tie ? "yes" : "no") + "\n";
    }
    return out;
}

enum class TrellisFormat { Dot, Text };

inline std::string export_trellis(const Problem& problem, const SolveResult& result, TrellisFormat format) {
    const TrellisDocument doc = build_trellis(problem, result);
    return format == TrellisFormat::Dot ? render_dot(doc) : render_text(doc);
}

} // namespace dyninfer
