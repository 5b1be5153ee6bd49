#include <algorithm>
#include <bit>
#include <limits>
#include <queue>
#include <string>

#include "driftqec/errors.h"
#include "driftqec/layout.h"
#include "driftqec/oracle.h"

namespace driftqec {

namespace {

std::uint64_t to_mask(const std::vector<int> &qubits) {
    std::uint64_t m = 0;
    for (int q : qubits) {
        m |= std::uint64_t{1} << q;
    }
    return m;
}

constexpr int kExhaustiveDefects = 10;
constexpr int kUnreachable = std::numeric_limits<int>::max() / 4;

}  // namespace

void check_distance(int d, int max_d) {
    if (d % 2 == 0) {
        throw ConfigError("distance must be odd (got " + std::to_string(d) + ")");
    }
    if (d < 3 || d > max_d) {
        throw ConfigError("distance must be in [3, " + std::to_string(max_d) + "] (got " + std::to_string(d) + ")");
    }
}

CodeLayout build_rotated_code(int d) {
    check_distance(d);
    CodeLayout layout;
    layout.d = d;
    for (int r = 0; r < d; r++) {
        for (int c = 0; c < d; c++) {
            layout.data_qubits.push_back({r, c});
        }
    }
    auto idx = [d](int r, int c) { return r * d + c; };

    // Face (i, j) covers data (i, j), (i, j+1), (i+1, j), (i+1, j+1) where in
    // range. (i + j) even -> X, odd -> Z. Weight-2 faces survive only on the
    // boundary of their own type: X top/bottom, Z left/right.
    for (int i = -1; i < d; i++) {
        for (int j = -1; j < d; j++) {
            std::vector<int> support;
            for (int dr = 0; dr < 2; dr++) {
                for (int dc = 0; dc < 2; dc++) {
                    int r = i + dr;
                    int c = j + dc;
                    if (r >= 0 && r < d && c >= 0 && c < d) {
                        support.push_back(idx(r, c));
                    }
                }
            }
            bool is_x = ((i + j) % 2 + 2) % 2 == 0;
            bool interior = i >= 0 && j >= 0 && i < d - 1 && j < d - 1;
            bool top_bottom = (i == -1 || i == d - 1) && j >= 0 && j < d - 1;
            bool left_right = (j == -1 || j == d - 1) && i >= 0 && i < d - 1;
            std::sort(support.begin(), support.end());
            if (interior) {
                (is_x ? layout.x_stabilizers : layout.z_stabilizers).push_back(support);
            } else if (top_bottom && is_x) {
                layout.x_stabilizers.push_back(support);
            } else if (left_right && !is_x) {
                layout.z_stabilizers.push_back(support);
            }
        }
    }
    for (int r = 0; r < d; r++) {
        layout.logical_x.push_back(idx(r, 0));
    }
    for (int c = 0; c < d; c++) {
        layout.logical_z.push_back(idx(0, c));
    }
    return layout;
}

std::vector<Coord> CodeLayout::ancilla_positions() const {
    std::vector<Coord> out;
    auto centre = [this](const std::vector<int> &support) {
        int r = 0;
        int c = 0;
        for (int q : support) {
            r += data_qubits[static_cast<std::size_t>(q)].row;
            c += data_qubits[static_cast<std::size_t>(q)].col;
        }
        int n = static_cast<int>(support.size());
        if (n == 4) {
            return Coord{r / 2, c / 2};
        }
        // Weight-2 faces: push the centre one half-step outside the patch.
        Coord a = data_qubits[static_cast<std::size_t>(support[0])];
        Coord b = data_qubits[static_cast<std::size_t>(support[1])];
        int cr = a.row + b.row;
        int cc = a.col + b.col;
        if (a.row == b.row) {
            cr += a.row == 0 ? -1 : 1;
        } else {
            cc += a.col == 0 ? -1 : 1;
        }
        return Coord{cr, cc};
    };
    for (const auto &s : x_stabilizers) {
        out.push_back(centre(s));
    }
    for (const auto &s : z_stabilizers) {
        out.push_back(centre(s));
    }
    return out;
}

bool odd_overlap(const std::vector<int> &a, const std::vector<int> &b) {
    std::size_t i = 0;
    std::size_t j = 0;
    int n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            n++;
            i++;
            j++;
        } else if (a[i] < b[j]) {
            i++;
        } else {
            j++;
        }
    }
    return n % 2 == 1;
}

SectorDecoder::SectorDecoder(const CodeLayout &layout, Sector sector) {
    const auto &checks = sector == Sector::x_errors ? layout.z_stabilizers : layout.x_stabilizers;
    logical_mask_ = to_mask(sector == Sector::x_errors ? layout.logical_z : layout.logical_x);
    num_data_ = static_cast<int>(layout.num_data());
    for (const auto &c : checks) {
        check_masks_.push_back(to_mask(c));
    }
    const int m = static_cast<int>(check_masks_.size());

    if (layout.d == 3) {
        // Exhaustive table: keep the first minimum-weight pattern per syndrome.
        table_.assign(std::size_t{1} << m, 0);
        std::vector<int> best(std::size_t{1} << m, kUnreachable);
        for (std::uint64_t e = 0; e < (std::uint64_t{1} << num_data_); e++) {
            std::uint32_t s = syndrome_of(e);
            int w = std::popcount(e);
            if (w < best[s]) {
                best[s] = w;
                table_[s] = e;
            }
        }
        return;
    }

    // Matching graph: node per check plus boundary node m.
    const int nodes = m + 1;
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(nodes));
    for (int q = 0; q < num_data_; q++) {
        std::vector<int> touching;
        for (int c = 0; c < m; c++) {
            if (check_masks_[static_cast<std::size_t>(c)] >> q & 1) {
                touching.push_back(c);
            }
        }
        if (touching.size() == 2) {
            adj[static_cast<std::size_t>(touching[0])].push_back({touching[1], q});
            adj[static_cast<std::size_t>(touching[1])].push_back({touching[0], q});
        } else if (touching.size() == 1) {
            adj[static_cast<std::size_t>(touching[0])].push_back({m, q});
            adj[static_cast<std::size_t>(m)].push_back({touching[0], q});
        }
    }
    dist_.assign(static_cast<std::size_t>(nodes), std::vector<int>(static_cast<std::size_t>(nodes), kUnreachable));
    pred_edge_.assign(static_cast<std::size_t>(nodes), std::vector<int>(static_cast<std::size_t>(nodes), -1));
    pred_node_.assign(static_cast<std::size_t>(nodes), std::vector<int>(static_cast<std::size_t>(nodes), -1));
    for (int src = 0; src < nodes; src++) {
        auto &dist = dist_[static_cast<std::size_t>(src)];
        std::queue<int> frontier;
        dist[static_cast<std::size_t>(src)] = 0;
        frontier.push(src);
        while (!frontier.empty()) {
            int u = frontier.front();
            frontier.pop();
            for (auto [v, q] : adj[static_cast<std::size_t>(u)]) {
                if (dist[static_cast<std::size_t>(v)] == kUnreachable) {
                    dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                    pred_edge_[static_cast<std::size_t>(src)][static_cast<std::size_t>(v)] = q;
                    pred_node_[static_cast<std::size_t>(src)][static_cast<std::size_t>(v)] = u;
                    frontier.push(v);
                }
            }
        }
    }
}

std::uint32_t SectorDecoder::syndrome_of(std::uint64_t error_mask) const {
    std::uint32_t s = 0;
    for (std::size_t c = 0; c < check_masks_.size(); c++) {
        s |= static_cast<std::uint32_t>(std::popcount(error_mask & check_masks_[c]) & 1) << c;
    }
    return s;
}

std::uint64_t SectorDecoder::path_mask(int from, int to) const {
    std::uint64_t mask = 0;
    int v = to;
    while (v != from) {
        mask ^= std::uint64_t{1} << pred_edge_[static_cast<std::size_t>(from)][static_cast<std::size_t>(v)];
        v = pred_node_[static_cast<std::size_t>(from)][static_cast<std::size_t>(v)];
    }
    return mask;
}

std::uint64_t SectorDecoder::match(std::uint32_t syndrome) const {
    const int boundary = static_cast<int>(check_masks_.size());
    std::vector<int> defects;
    for (int c = 0; c < boundary; c++) {
        if (syndrome >> c & 1) {
            defects.push_back(c);
        }
    }
    const int n = static_cast<int>(defects.size());
    auto dist = [this](int a, int b) { return dist_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; };
    std::uint64_t correction = 0;

    if (n <= kExhaustiveDefects) {
        // cost[S]: best matching of defect subset S, each defect paired with
        // another in S or sent to the boundary. Always expand the lowest member.
        const std::size_t full = std::size_t{1} << n;
        std::vector<int> cost(full, kUnreachable);
        std::vector<int> partner(full, -1);  // -1 = boundary
        cost[0] = 0;
        for (std::size_t s = 1; s < full; s++) {
            int i = std::countr_zero(s);
            std::size_t rest = s & ~(std::size_t{1} << i);
            int c = dist(defects[static_cast<std::size_t>(i)], boundary) + cost[rest];
            int best_partner = -1;
            for (std::size_t r = rest; r; r &= r - 1) {
                int j = std::countr_zero(r);
                int cj = dist(defects[static_cast<std::size_t>(i)], defects[static_cast<std::size_t>(j)]) +
                         cost[rest & ~(std::size_t{1} << j)];
                if (cj < c) {
                    c = cj;
                    best_partner = j;
                }
            }
            cost[s] = c;
            partner[s] = best_partner;
        }
        std::size_t s = full - 1;
        while (s) {
            int i = std::countr_zero(s);
            int j = partner[s];
            s &= ~(std::size_t{1} << i);
            if (j < 0) {
                correction ^= path_mask(defects[static_cast<std::size_t>(i)], boundary);
            } else {
                s &= ~(std::size_t{1} << j);
                correction ^= path_mask(defects[static_cast<std::size_t>(i)], defects[static_cast<std::size_t>(j)]);
            }
        }
        return correction;
    }

    std::vector<bool> open(static_cast<std::size_t>(n), true);
    int remaining = n;
    while (remaining > 0) {
        int bi = -1;
        int bj = -1;
        int bd = kUnreachable;
        for (int i = 0; i < n; i++) {
            if (!open[static_cast<std::size_t>(i)]) {
                continue;
            }
            int db = dist(defects[static_cast<std::size_t>(i)], boundary);
            if (db < bd) {
                bd = db;
                bi = i;
                bj = -1;
            }
            for (int j = i + 1; j < n; j++) {
                if (!open[static_cast<std::size_t>(j)]) {
                    continue;
                }
                int dij = dist(defects[static_cast<std::size_t>(i)], defects[static_cast<std::size_t>(j)]);
                if (dij < bd) {
                    bd = dij;
                    bi = i;
                    bj = j;
                }
            }
        }
        open[static_cast<std::size_t>(bi)] = false;
        remaining--;
        if (bj < 0) {
            correction ^= path_mask(defects[static_cast<std::size_t>(bi)], boundary);
        } else {
            open[static_cast<std::size_t>(bj)] = false;
            remaining--;
            correction ^= path_mask(defects[static_cast<std::size_t>(bi)], defects[static_cast<std::size_t>(bj)]);
        }
    }
    return correction;
}

std::uint64_t SectorDecoder::decode_mask(std::uint32_t syndrome) const {
    if (syndrome == 0) {
        return 0;
    }
    if (!table_.empty()) {
        return table_[syndrome];
    }
    return match(syndrome);
}

std::vector<int> SectorDecoder::decode(std::span<const std::uint8_t> syndrome) const {
    if (syndrome.size() != check_masks_.size()) {
        throw ConfigError("syndrome has " + std::to_string(syndrome.size()) + " bits, sector has " +
                          std::to_string(check_masks_.size()) + " checks");
    }
    std::uint32_t s = 0;
    for (std::size_t i = 0; i < syndrome.size(); i++) {
        if (syndrome[i] > 1) {
            throw ConfigError("syndrome bits must be 0 or 1");
        }
        s |= static_cast<std::uint32_t>(syndrome[i]) << i;
    }
    std::uint64_t mask = decode_mask(s);
    std::vector<int> out;
    for (int q = 0; q < num_data_; q++) {
        if (mask >> q & 1) {
            out.push_back(q);
        }
    }
    return out;
}

std::vector<int> decode_lookup(const CodeLayout &layout, Sector sector, std::span<const std::uint8_t> syndrome) {
    return SectorDecoder(layout, sector).decode(syndrome);
}

}  // namespace driftqec
