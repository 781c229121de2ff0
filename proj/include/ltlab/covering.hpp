#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ltlab/grid.hpp"

namespace ltlab {

struct CoveringParams {
    int epsilon_inv = 2;
    double delta = 0.1;
    // 0 selects the deepest level the grid resolves.
    int max_level = 0;
    bool hardy_mode = false;

    void validate() const;
};

// Cube of side epsilon^level at integer position `index` inside the unit root cube.
struct Cube {
    int level = 0;
    std::array<std::int64_t, 3> index{0, 0, 0};

    bool operator==(const Cube&) const = default;
    auto operator<=>(const Cube&) const = default;
};

enum class ClusterKind { Light, Heavy };

struct Cluster {
    int level = 0;
    std::vector<Cube> cubes;
    std::vector<double> cube_masses;
    ClusterKind kind = ClusterKind::Light;
    double support_mass = 0.0;
    double closure_mass = 0.0;
};

struct CoveringLevel {
    int n = 0;
    std::vector<Cube> g0;
    std::vector<double> g0_mass;
    std::vector<Cluster> light;
    std::vector<Cluster> heavy;
};

struct Decomposition {
    CoveringParams params;
    BoxSpec box;
    std::vector<CoveringLevel> levels;
    // Cubes of clusters still heavy at max_level.
    std::vector<Cube> residual;
    double total_mass = 0.0;
};

// Deepest level whose cubes still span at least one grid cell.
int max_resolvable_level(const BoxSpec& box, int epsilon_inv);

Decomposition decompose(const GridFunction& rho, const CoveringParams& params);

// Cell i belongs to the level-n cube containing its centre.
Cube cube_of_cell(const BoxSpec& box, int epsilon_inv, int level, std::size_t cell);
std::int64_t side_count(int epsilon_inv, int level);

DomainMask cubes_mask(const BoxSpec& box, int epsilon_inv, const std::vector<Cube>& cubes);
// Cells whose centre lies at distance < epsilon^n/4 from the union of cubes.
DomainMask closure_mask(const BoxSpec& box, int epsilon_inv, const std::vector<Cube>& cubes);

// Physical centre and side length of a cube.
Point cube_center(const BoxSpec& box, int epsilon_inv, const Cube& q);
double cube_side(const BoxSpec& box, int epsilon_inv, int level);

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
};

VerifyReport verify(const Decomposition& dec, const GridFunction& rho);

// Every terminal cube either has the origin as its centre or lies at distance
// at least half its side from it.
bool hardy_origin_check(const Decomposition& dec);

}  // namespace ltlab
