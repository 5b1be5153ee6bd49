#include "driftqec/spatial.h"

#include <ostream>

#include <fmt/format.h>

#include "driftqec/errors.h"
#include "driftqec/layout.h"

namespace driftqec::spatial {

namespace {

constexpr int kMaxSpatialDistance = 100'001;

void check_inputs(int d, int delta) {
    check_distance(d, kMaxSpatialDistance);
    if (delta < 0) {
        throw ConfigError(fmt::format("delta must be non-negative (got {})", delta));
    }
}

}  // namespace

std::int64_t tile_qubits(int d) {
    check_distance(d, kMaxSpatialDistance);
    const std::int64_t dd = d;
    return 2 * dd * dd - 1;
}

std::int64_t unit_tile_qubits(int d) {
    check_distance(d, kMaxSpatialDistance);
    const std::int64_t dd = d;
    return 8 * dd * dd - 4;
}

std::int64_t deformation_unit_tile_qubits(int d, int delta) {
    check_inputs(d, delta);
    const std::int64_t wide = static_cast<std::int64_t>(d) + delta;
    return 3 * (2 * wide * wide - 1) + tile_qubits(d);
}

std::int64_t deformation_unit_tile_qubits_expanded(int d, int delta) {
    check_inputs(d, delta);
    const std::int64_t dd = d;
    const std::int64_t dl = delta;
    return 8 * dd * dd + 12 * dd * dl + 6 * dl * dl - 4;
}

Rational reloqation_ratio(int d, int delta) {
    check_inputs(d, delta);
    const std::int64_t dd = d;
    const std::int64_t dl = delta;
    return Rational(3 * dl * (2 * dd + dl), 4 * dd * dd - 2);
}

bool break_even_holds(int d, int delta, const Rational &ratio) {
    check_inputs(d, delta);
    // Per logical qubit: (1 + M/N) unit(d) == deform(d, delta).
    return (Rational(1) + ratio) * unit_tile_qubits(d) == Rational(deformation_unit_tile_qubits(d, delta));
}

std::vector<CrossoverRow> crossover_report(int delta, const std::vector<int> &d_range, std::int64_t n_qubits) {
    if (d_range.empty()) {
        throw ConfigError("crossover report needs at least one distance");
    }
    if (n_qubits < 1) {
        throw ConfigError(fmt::format("number of logical qubits must be at least 1 (got {})", n_qubits));
    }
    std::vector<CrossoverRow> rows;
    rows.reserve(d_range.size());
    for (int d : d_range) {
        CrossoverRow row;
        row.d = d;
        row.delta = delta;
        row.ratio = reloqation_ratio(d, delta);
        const Rational m = row.ratio * n_qubits;
        row.max_m = m.numerator() / m.denominator();
        row.efficient = row.ratio <= Rational(1);
        rows.push_back(row);
    }
    return rows;
}

void write_crossover_csv(std::ostream &out, const std::vector<CrossoverRow> &rows) {
    out << "d,delta,ratio,max_M,efficient\n";
    for (const auto &r : rows) {
        const double ratio = static_cast<double>(r.ratio.numerator()) / static_cast<double>(r.ratio.denominator());
        out << fmt::format("{},{},{:.10g},{},{}\n", r.d, r.delta, ratio, r.max_m, r.efficient ? 1 : 0);
    }
}

}  // namespace driftqec::spatial
