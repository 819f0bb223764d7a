#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "kdetl/error.hpp"
#include "kdetl/synthetic.hpp"

namespace kdetl {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct NodeLine {
    double intercept = 0.0;
    double variance = 1.0;
    std::vector<std::pair<std::string, double>> coefs;
    int line = 0;
};

[[noreturn]] void malformed(int line, const std::string& what) {
    throw Error("malformed-network", "line " + std::to_string(line) + ": " + what);
}

double number(const std::string& text, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        malformed(line, "expected a number, got '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) malformed(line, "expected a number, got '" + text + "'");
    return v;
}

}  // namespace

StructuralNetwork parse_lgbn(std::string_view text) {
    std::vector<std::string> order;
    std::map<std::string, NodeLine> nodes;
    std::vector<std::pair<std::string, std::string>> arcs;
    std::vector<int> arc_lines;

    std::istringstream in{std::string(text)};
    std::string raw;
    int number_of_line = 0;
    while (std::getline(in, raw)) {
        ++number_of_line;
        std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.rfind("arc ", 0) == 0) {
            std::istringstream ls(line.substr(4));
            std::string p, c, extra;
            if (!(ls >> p >> c) || (ls >> extra)) malformed(number_of_line, "expected 'arc <parent> <child>'");
            arcs.emplace_back(p, c);
            arc_lines.push_back(number_of_line);
            continue;
        }
        if (line.rfind("node ", 0) == 0) line = trim(line.substr(5));
        const auto colon = line.find(':');
        if (colon == std::string::npos) malformed(number_of_line, "expected '<name>: intercept <b>, var <v>'");
        const std::string name = trim(line.substr(0, colon));
        if (name.empty() || name.find_first_of(" \t,") != std::string::npos) malformed(number_of_line, "bad node name");
        if (nodes.count(name)) throw Error("duplicate-name", "node '" + name + "' declared twice");
        NodeLine node;
        node.line = number_of_line;
        bool has_intercept = false;
        bool has_var = false;
        std::istringstream fields(line.substr(colon + 1));
        std::string field;
        while (std::getline(fields, field, ',')) {
            std::istringstream fs(trim(field));
            std::string key, value, extra;
            if (!(fs >> key >> value) || (fs >> extra)) malformed(number_of_line, "bad field '" + trim(field) + "'");
            if (key == "intercept") {
                node.intercept = number(value, number_of_line);
                has_intercept = true;
            } else if (key == "var") {
                node.variance = number(value, number_of_line);
                has_var = true;
            } else {
                node.coefs.emplace_back(key, number(value, number_of_line));
            }
        }
        if (!has_intercept || !has_var) malformed(number_of_line, "node needs both intercept and var");
        if (!(node.variance > 0.0)) malformed(number_of_line, "variance must be positive");
        order.push_back(name);
        nodes.emplace(name, std::move(node));
    }
    if (order.empty()) throw Error("malformed-network", "no nodes declared");

    StructuralNetwork net{Dag(order), {}};
    const auto& ns = net.dag.nodes();
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        const auto p = ns.find(arcs[i].first);
        const auto c = ns.find(arcs[i].second);
        if (!p || !c) malformed(arc_lines[i], "arc references an undeclared node");
        try {
            net.dag.add_arc(*p, *c);
        } catch (const Error& e) {
            malformed(arc_lines[i], e.what());
        }
    }
    for (int v = 0; v < static_cast<int>(order.size()); ++v) {
        const auto& node = nodes.at(order[static_cast<std::size_t>(v)]);
        Component c{1.0, node.intercept, {}, std::sqrt(node.variance)};
        for (const auto& [parent, coef] : node.coefs) {
            const auto p = ns.find(parent);
            if (!p || !net.dag.has_arc(*p, v)) {
                throw Error("non-parent-coefficient", "line " + std::to_string(node.line) + ": '" + parent +
                                                          "' is not a parent of '" + order[static_cast<std::size_t>(v)] + "'");
            }
            c.terms.push_back(Term{coef, {*p}});
        }
        net.equations.push_back(NodeEquation{{c}});
    }
    net.validate();
    return net;
}

StructuralNetwork load_lgbn(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("unreadable-file", "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_lgbn(buf.str());
}

std::string format_lgbn(const StructuralNetwork& net) {
    std::ostringstream out;
    out.precision(17);
    const auto& ns = net.dag.nodes();
    for (int v = 0; v < static_cast<int>(net.dag.size()); ++v) {
        const auto& eq = net.equations[static_cast<std::size_t>(v)];
        if (eq.components.size() != 1) throw Error("not-linear-gaussian", "mixture node '" + ns.name(v) + "'");
        const auto& c = eq.components.front();
        out << "node " << ns.name(v) << ": intercept " << c.intercept << ", var " << c.stddev * c.stddev;
        for (const auto& t : c.terms) {
            if (t.parents.size() != 1) throw Error("not-linear-gaussian", "product term at '" + ns.name(v) + "'");
            out << ", " << ns.name(t.parents.front()) << ' ' << t.coef;
        }
        out << '\n';
    }
    for (const auto& a : net.dag.arcs()) out << "arc " << ns.name(a.parent) << ' ' << ns.name(a.child) << '\n';
    return out.str();
}

}  // namespace kdetl
