#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace driftqec {

struct Coord {
    int row;
    int col;
    bool operator==(const Coord &) const = default;
};

/// Rotated surface code patch of odd distance d.
///
/// Data qubit (r, c) has index r * d + c. Faces are weighted by the checkerboard
/// colour of their top-left corner: X plaquettes sit on the top and bottom
/// boundaries, Z plaquettes on the left and right. Logical X is the first
/// column, logical Z the first row.
struct CodeLayout {
    int d = 0;
    std::vector<Coord> data_qubits;
    std::vector<std::vector<int>> x_stabilizers;
    std::vector<std::vector<int>> z_stabilizers;
    std::vector<int> logical_x;
    std::vector<int> logical_z;

    std::size_t num_data() const {
        return data_qubits.size();
    }
    /// Detectors per round, N = d^2 - 1.
    std::size_t detector_count() const {
        return x_stabilizers.size() + z_stabilizers.size();
    }
    /// Ancilla (measure) qubit centre for each stabilizer, X first then Z.
    /// Coordinates are doubled so that face centres are integral.
    std::vector<Coord> ancilla_positions() const;
};

/// Builds the layout for d in {3, 5, 7}. Throws ConfigError otherwise
/// ("distance must be odd" / out of range).
CodeLayout build_rotated_code(int d);

/// Validates a distance argument without building anything.
void check_distance(int d, int max_d = 7);

/// Parity of |a ∩ b| for two sorted index sets.
bool odd_overlap(const std::vector<int> &a, const std::vector<int> &b);

}  // namespace driftqec
