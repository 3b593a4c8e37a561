#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "simalign/mt19937.hpp"

namespace simalign::pphpc {

// Reference-model variants: the conceptual model, agents sorted by energy
// instead of shuffled before acting, and the food restart reduced by one.
enum class Variant { reference, no_shuffle_sorted, cr_minus_one };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);  // accepts '-' or '_'

struct SpeciesDynamics {
    int energy_gain = 4;
    int reproduce_threshold = 2;
    int reproduce_prob_percent = 4;

    friend bool operator==(const SpeciesDynamics&, const SpeciesDynamics&) = default;
};

struct Params {
    int grid_size = 100;
    int init_prey = 400;
    int init_pred = 200;
    int c_r = 10;
    int iterations = 4000;
    SpeciesDynamics prey{4, 2, 4};
    SpeciesDynamics predator{20, 2, 4};
    int energy_loss = 1;
    Variant variant = Variant::reference;

    // Named model size (grid side) and parameter set (1 or 2).
    static Params for_size(int size, int parameter_set);

    int effective_c_r() const { return variant == Variant::cr_minus_one ? c_r - 1 : c_r; }
    // Throws ValidationError.
    void validate() const;

    friend bool operator==(const Params&, const Params&) = default;
};

// Iteration after which the parameter set is in steady state.
int default_truncation(int parameter_set);

// MD5 digest of the decimal representation of the replication index.
struct Seed {
    std::array<std::uint8_t, 16> digest{};

    // Digest as four big-endian 32-bit words, the init_by_array key.
    std::array<std::uint32_t, 4> words() const;
    std::string hex() const;
};

Seed seed_for_replication(std::uint64_t r);

enum class Species : std::uint8_t { prey, predator };

struct Agent {
    Species species;
    int energy;
    std::uint32_t cell;
};

inline constexpr std::size_t kOutputCount = 6;
// P^s, P^w, P^c, mean E^s, mean E^w, mean C.
inline constexpr std::array<std::string_view, kOutputCount> kOutputNames = {"Ps", "Pw", "Pc", "Es", "Ew", "C"};

using Outputs = std::array<double, kOutputCount>;

struct State {
    Params params;
    int iteration = 0;
    std::vector<int> cells;  // countdown C per cell, row-major
    std::vector<Agent> agents;
    Mt19937 rng;

    Outputs outputs() const;
};

State init(const Params& params, const Seed& seed);
// One iteration: movement, food growth, agent actions.
void step(State& state);

// Six series of length iterations + 1, ordered as kOutputNames.
std::array<std::vector<double>, kOutputCount> run(const Params& params, std::uint64_t replication);

// Replications r_offset + 1 .. r_offset + n, one n x (m+1) matrix per output.
std::array<Eigen::MatrixXd, kOutputCount> run_experiment(const Params& params, std::size_t n, std::uint64_t r_offset);

}  // namespace simalign::pphpc
