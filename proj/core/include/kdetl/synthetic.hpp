#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kdetl/dataset.hpp"
#include "kdetl/graph.hpp"
#include "kdetl/rng.hpp"

namespace kdetl {

// coef * product of the listed parents (a plain linear term has one parent).
struct Term {
    double coef = 0.0;
    std::vector<int> parents;
};

struct Component {
    double weight = 1.0;
    double intercept = 0.0;
    std::vector<Term> terms;
    double stddev = 1.0;
};

struct NodeEquation {
    std::vector<Component> components;
};

/// Structural-equation network: each node is a Gaussian mixture whose
/// component means are polynomial in the parents.
struct StructuralNetwork {
    Dag dag;
    std::vector<NodeEquation> equations;  // indexed like dag nodes

    // Throws kdetl::Error when an invariant is broken.
    void validate() const;
};

StructuralNetwork build_spbn(int id);

// Ancestral sampling; node v draws from its own stream seed.derive(name).
Dataset sample(const StructuralNetwork& net, std::size_t n, Seed seed);

struct CorruptionSpec {
    double modified_fraction = 0.0;
    double noise_mean = 0.0;
    double noise_std = 1.0;
    Seed seed{};
};

struct ModificationLog {
    std::vector<std::pair<std::string, std::string>> removed;
    std::vector<std::pair<std::string, std::string>> added;
    std::vector<std::string> messages;
};

/// Relocates ceil(fraction * |arcs|) arcs: each chosen arc loses its terms in
/// the child's equation and a new arc is drawn uniformly among non-adjacent,
/// acyclic pairs, entering the target's first component with a coefficient
/// drawn from U[0.3, 1.5].
StructuralNetwork modify_arcs(const StructuralNetwork& net, const CorruptionSpec& spec,
                              ModificationLog* log = nullptr);

Dataset add_noise(const Dataset& data, const CorruptionSpec& spec);

/// Linear-Gaussian network text format:
///   [node] <name>: intercept <b0>, var <v>[, <parent> <coef>]*
///   arc <parent> <child>
/// Parents must be declared with arc lines; '#' starts a comment line.
StructuralNetwork parse_lgbn(std::string_view text);
StructuralNetwork load_lgbn(const std::filesystem::path& path);
// Single-component linear networks only.
std::string format_lgbn(const StructuralNetwork& net);

}  // namespace kdetl
