#pragma once

#include <filesystem>
#include <string>

#include "ltlab/grid.hpp"

namespace ltlab {

// Binary grid files: raw little-endian data at `path` plus a JSON sidecar at
// `path` + ".json" holding {"d","points","lo","hi","dtype"} and, for N-body
// states, "N".
struct GridHeader {
    BoxSpec box;
    std::string dtype;
    int N = 0;
};

std::filesystem::path sidecar_path(const std::filesystem::path& data);

GridHeader read_header(const std::filesystem::path& data);
void write_grid(const std::filesystem::path& data, const GridFunction& u);
GridFunction read_grid(const std::filesystem::path& data);
void write_mask(const std::filesystem::path& data, const DomainMask& m);
DomainMask read_mask(const std::filesystem::path& data);

// Raw N-body tensor; the one-body box is stored in the header.
void write_state_raw(const std::filesystem::path& data, const BoxSpec& box, int N, const std::vector<cplx>& values);
std::vector<cplx> read_state_raw(const std::filesystem::path& data, GridHeader& header);

}  // namespace ltlab
