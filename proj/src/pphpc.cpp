#include "simalign/pphpc.hpp"

#include <algorithm>
#include <cstdio>

#include <openssl/evp.h>

#include "simalign/errors.hpp"
#include "simalign/parallel.hpp"

namespace simalign::pphpc {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::reference: return "reference";
        case Variant::no_shuffle_sorted: return "no-shuffle-sorted";
        case Variant::cr_minus_one: return "cr-minus-one";
    }
    return "reference";
}

Variant variant_from_string(std::string_view name) {
    std::string normalized(name);
    std::replace(normalized.begin(), normalized.end(), '_', '-');
    if (normalized == "reference") return Variant::reference;
    if (normalized == "no-shuffle-sorted") return Variant::no_shuffle_sorted;
    if (normalized == "cr-minus-one") return Variant::cr_minus_one;
    throw ValidationError("unknown variant '" + std::string(name) + "'");
}

Params Params::for_size(int size, int parameter_set) {
    if (size <= 0) throw ValidationError("model size must be positive");
    if (parameter_set != 1 && parameter_set != 2) throw ValidationError("parameter set must be 1 or 2");
    Params p;
    p.grid_size = size;
    // 400 prey and 200 predators per 100x100 cells.
    const long long cells = static_cast<long long>(size) * size;
    p.init_prey = static_cast<int>(cells * 4 / 100);
    p.init_pred = static_cast<int>(cells * 2 / 100);
    p.c_r = parameter_set == 1 ? 10 : 15;
    return p;
}

int default_truncation(int parameter_set) { return parameter_set == 2 ? 2000 : 1000; }

void Params::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw ValidationError(std::string("invalid PPHPC parameters: ") + what);
    };
    check(grid_size >= 1, "grid_size must be >= 1");
    check(init_prey >= 0 && init_pred >= 0, "initial populations must be >= 0");
    check(c_r >= 1, "c_r must be >= 1");
    check(effective_c_r() >= 0, "effective c_r must be >= 0");
    check(iterations >= 1, "iterations must be >= 1");
    check(energy_loss >= 0, "energy_loss must be >= 0");
    for (const auto* s : {&prey, &predator}) {
        check(s->energy_gain >= 1, "energy_gain must be >= 1");
        check(s->reproduce_threshold >= 1, "reproduce_threshold must be >= 1");
        check(s->reproduce_prob_percent >= 0 && s->reproduce_prob_percent <= 100,
              "reproduce_prob_percent must be in [0,100]");
    }
}

std::array<std::uint32_t, 4> Seed::words() const {
    std::array<std::uint32_t, 4> out{};
    for (std::size_t w = 0; w < 4; ++w) {
        out[w] = (std::uint32_t{digest[4 * w]} << 24) | (std::uint32_t{digest[4 * w + 1]} << 16) |
                 (std::uint32_t{digest[4 * w + 2]} << 8) | std::uint32_t{digest[4 * w + 3]};
    }
    return out;
}

std::string Seed::hex() const {
    std::string out;
    char buf[3];
    for (auto byte : digest) {
        std::snprintf(buf, sizeof buf, "%02x", byte);
        out += buf;
    }
    return out;
}

Seed seed_for_replication(std::uint64_t r) {
    const std::string text = std::to_string(r);
    Seed seed;
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), seed.digest.data(), &len, EVP_md5(), nullptr) != 1 || len != 16) {
        throw Error("MD5 digest failed");
    }
    return seed;
}

Outputs State::outputs() const {
    double prey = 0.0, pred = 0.0, prey_energy = 0.0, pred_energy = 0.0;
    for (const auto& a : agents) {
        if (a.species == Species::prey) {
            prey += 1.0;
            prey_energy += a.energy;
        } else {
            pred += 1.0;
            pred_energy += a.energy;
        }
    }
    double food = 0.0;
    double countdown = 0.0;
    for (int c : cells) {
        if (c == 0) food += 1.0;
        countdown += c;
    }
    return {prey,
            pred,
            food,
            prey > 0.0 ? prey_energy / prey : 0.0,
            pred > 0.0 ? pred_energy / pred : 0.0,
            countdown / static_cast<double>(cells.size())};
}

State init(const Params& params, const Seed& seed) {
    params.validate();
    State s;
    s.params = params;
    const auto key = seed.words();
    s.rng.seed_array(key);

    const auto n_cells = static_cast<std::uint32_t>(params.grid_size) * static_cast<std::uint32_t>(params.grid_size);
    const auto c_r = static_cast<std::uint32_t>(params.effective_c_r());
    s.cells.resize(n_cells);
    for (auto& c : s.cells) c = static_cast<int>(s.rng.below(c_r + 1));

    s.agents.reserve(static_cast<std::size_t>(params.init_prey + params.init_pred) * 4);
    auto place = [&](Species species, int count, const SpeciesDynamics& dyn) {
        for (int i = 0; i < count; ++i) {
            const auto cell = s.rng.below(n_cells);
            const int energy = 1 + static_cast<int>(s.rng.below(static_cast<std::uint32_t>(2 * dyn.energy_gain)));
            s.agents.push_back({species, energy, cell});
        }
    };
    place(Species::prey, params.init_prey, params.prey);
    place(Species::predator, params.init_pred, params.predator);
    return s;
}

namespace {

std::uint32_t neighbor(std::uint32_t cell, std::uint32_t direction, std::uint32_t size) {
    std::uint32_t x = cell % size;
    std::uint32_t y = cell / size;
    switch (direction) {
        case 1: x = (x + 1) % size; break;
        case 2: x = (x + size - 1) % size; break;
        case 3: y = (y + 1) % size; break;
        case 4: y = (y + size - 1) % size; break;
        default: break;  // stay
    }
    return y * size + x;
}

}  // namespace

void step(State& s) {
    const Params& p = s.params;
    const auto size = static_cast<std::uint32_t>(p.grid_size);
    const auto n_cells = static_cast<std::uint32_t>(s.cells.size());
    const int c_r = p.effective_c_r();

    // 1. Movement; agents whose energy runs out are removed.
    std::size_t kept = 0;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        Agent a = s.agents[i];
        a.cell = neighbor(a.cell, s.rng.below(5), size);
        a.energy -= p.energy_loss;
        if (a.energy > 0) s.agents[kept++] = a;
    }
    s.agents.resize(kept);

    // 2. Food growth.
    for (auto& c : s.cells) {
        if (c > 0) --c;
    }

    // 3. Agent actions, in shuffled or energy-sorted order.
    auto& agents = s.agents;
    if (p.variant == Variant::no_shuffle_sorted) {
        std::stable_sort(agents.begin(), agents.end(),
                         [](const Agent& a, const Agent& b) { return a.energy < b.energy; });
    } else {
        for (std::size_t i = agents.size(); i > 1; --i) {
            const auto j = s.rng.below(static_cast<std::uint32_t>(i));
            std::swap(agents[i - 1], agents[j]);
        }
    }

    // Prey indices bucketed by cell, so a predator can find its prey.
    std::vector<std::uint32_t> bucket_start(n_cells + 1, 0);
    for (const auto& a : agents) {
        if (a.species == Species::prey) ++bucket_start[a.cell + 1];
    }
    for (std::uint32_t c = 0; c < n_cells; ++c) bucket_start[c + 1] += bucket_start[c];
    std::vector<std::uint32_t> bucket(bucket_start[n_cells]);
    {
        std::vector<std::uint32_t> fill(bucket_start.begin(), bucket_start.end() - 1);
        for (std::uint32_t i = 0; i < agents.size(); ++i) {
            if (agents[i].species == Species::prey) bucket[fill[agents[i].cell]++] = i;
        }
    }

    std::vector<char> alive(agents.size(), 1);
    std::vector<Agent> born;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (!alive[i]) continue;
        Agent& a = agents[i];
        const SpeciesDynamics& dyn = a.species == Species::prey ? p.prey : p.predator;
        if (a.species == Species::prey) {
            if (s.cells[a.cell] == 0) {
                a.energy += dyn.energy_gain;
                s.cells[a.cell] = c_r;
            }
        } else {
            const auto begin = bucket_start[a.cell];
            const auto end = bucket_start[a.cell + 1];
            std::uint32_t available = 0;
            for (auto k = begin; k < end; ++k) available += alive[bucket[k]] ? 1u : 0u;
            if (available > 0) {
                auto pick = s.rng.below(available);
                for (auto k = begin; k < end; ++k) {
                    if (!alive[bucket[k]]) continue;
                    if (pick-- == 0) {
                        alive[bucket[k]] = 0;
                        break;
                    }
                }
                a.energy += dyn.energy_gain;
            }
        }
        if (a.energy > dyn.reproduce_threshold &&
            s.rng.below(100) < static_cast<std::uint32_t>(dyn.reproduce_prob_percent)) {
            const int child = a.energy / 2;
            a.energy -= child;
            born.push_back({a.species, child, a.cell});
        }
    }

    kept = 0;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (alive[i]) agents[kept++] = agents[i];
    }
    agents.resize(kept);
    agents.insert(agents.end(), born.begin(), born.end());
    ++s.iteration;
}

std::array<std::vector<double>, kOutputCount> run(const Params& params, std::uint64_t replication) {
    State s = init(params, seed_for_replication(replication));
    std::array<std::vector<double>, kOutputCount> series;
    for (auto& v : series) v.reserve(static_cast<std::size_t>(params.iterations) + 1);
    auto record = [&] {
        const auto out = s.outputs();
        for (std::size_t k = 0; k < kOutputCount; ++k) series[k].push_back(out[k]);
    };
    record();
    for (int i = 0; i < params.iterations; ++i) {
        step(s);
        record();
    }
    return series;
}

std::array<Eigen::MatrixXd, kOutputCount> run_experiment(const Params& params, std::size_t n, std::uint64_t r_offset) {
    if (n < 2) throw ValidationError("an experiment needs at least 2 replications, got " + std::to_string(n));
    params.validate();
    const auto cols = static_cast<Eigen::Index>(params.iterations) + 1;
    std::array<Eigen::MatrixXd, kOutputCount> out;
    for (auto& m : out) m.resize(static_cast<Eigen::Index>(n), cols);

    parallel_for(n, [&](std::size_t i) {
        const auto series = run(params, r_offset + i + 1);
        for (std::size_t k = 0; k < kOutputCount; ++k) {
            for (Eigen::Index c = 0; c < cols; ++c) out[k](static_cast<Eigen::Index>(i), c) = series[k][static_cast<std::size_t>(c)];
        }
    });
    return out;
}

}  // namespace simalign::pphpc
