#include "kdetl/graph_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "kdetl/error.hpp"

namespace kdetl {

namespace {

struct Statement {
    std::string kind;
    std::string a;
    std::string b;
    int line = 0;
};

std::vector<Statement> tokenize(std::string_view text) {
    std::vector<Statement> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::istringstream ls(line);
        Statement s;
        s.line = number;
        if (!(ls >> s.kind) || s.kind.front() == '#') continue;
        std::string extra;
        const bool ok = s.kind == "node" ? static_cast<bool>(ls >> s.a) && !(ls >> extra)
                        : (s.kind == "arc" || s.kind == "edge")
                            ? static_cast<bool>(ls >> s.a >> s.b) && !(ls >> extra)
                            : false;
        if (!ok) throw Error("malformed-graph", "line " + std::to_string(number) + ": '" + line + "'");
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::string> node_names(const std::vector<Statement>& st) {
    std::vector<std::string> names;
    for (const auto& s : st) {
        if (s.kind == "node") names.push_back(s.a);
    }
    return names;
}

std::string node_lines(const NodeSet& nodes) {
    std::string out;
    for (const auto& n : nodes.names()) out += "node " + n + "\n";
    return out;
}

}  // namespace

std::string format_dag(const Dag& g) {
    std::string out = node_lines(g.nodes());
    for (const auto& a : g.arcs()) out += "arc " + g.nodes().name(a.parent) + " " + g.nodes().name(a.child) + "\n";
    return out;
}

std::string format_pdag(const Pdag& g) {
    std::string out = node_lines(g.nodes());
    for (const auto& a : g.arcs()) out += "arc " + g.nodes().name(a.parent) + " " + g.nodes().name(a.child) + "\n";
    for (const auto& e : g.edges()) out += "edge " + g.nodes().name(e.a) + " " + g.nodes().name(e.b) + "\n";
    return out;
}

Dag parse_dag(std::string_view text) {
    const auto st = tokenize(text);
    Dag g(node_names(st));
    for (const auto& s : st) {
        if (s.kind == "edge") throw Error("malformed-graph", "undirected edge in a DAG file");
        if (s.kind == "arc") g.add_arc(s.a, s.b);
    }
    return g;
}

Pdag parse_pdag(std::string_view text) {
    const auto st = tokenize(text);
    Pdag g(node_names(st));
    const auto& nodes = g.nodes();
    for (const auto& s : st) {
        if (s.kind == "arc") g.add_arc(nodes.index_of(s.a), nodes.index_of(s.b));
        if (s.kind == "edge") g.add_edge(nodes.index_of(s.a), nodes.index_of(s.b));
    }
    return g;
}

void write_dag(const Dag& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write-failed", "cannot write " + path.string());
    out << format_dag(g);
    if (!out) throw Error("write-failed", "cannot write " + path.string());
}

Dag read_dag(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("unreadable-file", "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_dag(buf.str());
}

}  // namespace kdetl
