#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdistill {

// Particles per site; length and total are fixed by the owning basis.
using OccupationVector = std::vector<int>;

inline long long checked_add(long long a, long long b) {
    if (b > 0 && a > std::numeric_limits<long long>::max() - b)
        throw std::overflow_error("checked_add: dimension overflow");
    return a + b;
}

// Exact C(n, k) via Pascal recursion; throws on overflow instead of wrapping.
inline long long binomial(int n, int k) {
    if (k < 0 || k > n || n < 0) return 0;
    k = std::min(k, n - k);
    std::vector<long long> row(static_cast<std::size_t>(k) + 1, 0);
    row[0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = std::min(i, k); j >= 1; --j)
            row[j] = checked_add(row[j], row[j - 1]);
    return row[static_cast<std::size_t>(k)];
}

// Number of occupation vectors of `sites` sites holding exactly `particles` bosons.
inline long long fock_dimension(int sites, int particles) {
    return binomial(particles + sites - 1, particles);
}

// Ordered occupation-number basis at fixed site count and total particle number.
// Ordering is descending lexicographic on the occupation vectors and never changes;
// matrices, control paths and CSV output all assume it.
class FockBasis {
public:
    FockBasis() = default;

    FockBasis(int sites, int particles) : sites_(sites), particles_(particles) {
        if (sites < 1) throw std::invalid_argument("FockBasis: site count must be >= 1");
        if (particles < 0) throw std::invalid_argument("FockBasis: particle number must be >= 0");
        states_.reserve(static_cast<std::size_t>(fock_dimension(sites, particles)));
        OccupationVector occ(static_cast<std::size_t>(sites), 0);
        emit(occ, 0, particles);
        for (Eigen::Index j = 0; j < dim(); ++j)
            index_.emplace(states_[static_cast<std::size_t>(j)], j);
        tag_ = "fock:L=" + std::to_string(sites) + ",N=" + std::to_string(particles);
    }

    int sites() const { return sites_; }
    int particles() const { return particles_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(states_.size()); }
    const std::vector<OccupationVector>& states() const { return states_; }
    const OccupationVector& state(Eigen::Index j) const { return states_.at(static_cast<std::size_t>(j)); }
    const std::string& tag() const { return tag_; }

    Eigen::Index index_of(const OccupationVector& occ) const {
        auto it = index_.find(occ);
        if (it == index_.end())
            throw std::invalid_argument("FockBasis::index_of: state not in this basis");
        return it->second;
    }

private:
    void emit(OccupationVector& occ, int site, int remaining) {
        if (site == sites_ - 1) {
            occ[static_cast<std::size_t>(site)] = remaining;
            states_.push_back(occ);
            return;
        }
        for (int n = remaining; n >= 0; --n) {
            occ[static_cast<std::size_t>(site)] = n;
            emit(occ, site + 1, remaining - n);
        }
    }

    int sites_ = 0;
    int particles_ = 0;
    std::vector<OccupationVector> states_;
    std::map<OccupationVector, Eigen::Index> index_;
    std::string tag_;
};

inline FockBasis enumerate_basis(int sites, int particles) { return FockBasis(sites, particles); }

struct SectorCoordinate {
    int n_A = 0;
    int n_B = 0;
    Eigen::Index a_index = 0;
    Eigen::Index b_index = 0;
};

// One (n_A, n_B) block of the bipartite decomposition. `global` stores the full-basis
// index of the pair (a, b) at slot a * d_B + b (A-major, so tracing out A strides by d_B).
struct SectorLayout {
    int n_A = 0;
    int n_B = 0;
    Eigen::Index d_A = 0;
    Eigen::Index d_B = 0;
    Eigen::Index a_offset = 0;  // offset of this sector's A block in the reduced-A space
    Eigen::Index b_offset = 0;  // offset of this sector's B block in the reduced-B space
    std::vector<Eigen::Index> global;

    Eigen::Index global_index(Eigen::Index a, Eigen::Index b) const {
        return global[static_cast<std::size_t>(a * d_B + b)];
    }
};

// Bipartition of a basis into sites 1..l_A (A) and the rest (B), with the sector maps
// used by partial traces and the entropy bound. Also represents a qubit register split,
// in which case there is a single sector covering the whole space.
struct BipartiteSplit {
    int l_A = 0;
    int l_B = 0;
    int total_particles = 0;
    bool qubit_register = false;
    std::string basis_tag;
    Eigen::Index dim = 0;    // full space
    Eigen::Index dim_A = 0;  // reduced-A space
    Eigen::Index dim_B = 0;  // reduced-B space
    std::vector<long long> d_A_list;  // d_A_list[n] = dim of A-side occupancy-n block
    std::vector<long long> d_B_list;
    std::vector<SectorLayout> sectors;        // ordered by n_B ascending
    std::vector<SectorCoordinate> coordinates;  // per full-basis index

    const SectorCoordinate& sector_of(Eigen::Index j) const {
        return coordinates.at(static_cast<std::size_t>(j));
    }
};

inline BipartiteSplit split(const FockBasis& basis, int l_A) {
    const int L = basis.sites();
    const int N = basis.particles();
    if (l_A < 1 || l_A > L - 1)
        throw std::invalid_argument("split: l_A must satisfy 1 <= l_A <= L-1");

    BipartiteSplit s;
    s.l_A = l_A;
    s.l_B = L - l_A;
    s.total_particles = N;
    s.basis_tag = basis.tag();
    s.dim = basis.dim();

    for (int n = 0; n <= N; ++n) {
        s.d_A_list.push_back(fock_dimension(l_A, n));
        s.d_B_list.push_back(fock_dimension(s.l_B, n));
    }

    std::vector<FockBasis> a_basis, b_basis;
    a_basis.reserve(static_cast<std::size_t>(N) + 1);
    b_basis.reserve(static_cast<std::size_t>(N) + 1);
    for (int n = 0; n <= N; ++n) {
        a_basis.emplace_back(l_A, n);
        b_basis.emplace_back(s.l_B, n);
    }

    std::vector<Eigen::Index> a_offsets(static_cast<std::size_t>(N) + 1, 0);
    std::vector<Eigen::Index> b_offsets(static_cast<std::size_t>(N) + 1, 0);
    Eigen::Index acc_a = 0, acc_b = 0;
    for (int n = 0; n <= N; ++n) {
        a_offsets[static_cast<std::size_t>(n)] = acc_a;
        b_offsets[static_cast<std::size_t>(n)] = acc_b;
        acc_a += static_cast<Eigen::Index>(s.d_A_list[static_cast<std::size_t>(n)]);
        acc_b += static_cast<Eigen::Index>(s.d_B_list[static_cast<std::size_t>(n)]);
    }
    s.dim_A = acc_a;
    s.dim_B = acc_b;

    s.sectors.resize(static_cast<std::size_t>(N) + 1);
    for (int n_B = 0; n_B <= N; ++n_B) {
        auto& sec = s.sectors[static_cast<std::size_t>(n_B)];
        sec.n_B = n_B;
        sec.n_A = N - n_B;
        sec.d_A = static_cast<Eigen::Index>(s.d_A_list[static_cast<std::size_t>(sec.n_A)]);
        sec.d_B = static_cast<Eigen::Index>(s.d_B_list[static_cast<std::size_t>(n_B)]);
        sec.a_offset = a_offsets[static_cast<std::size_t>(sec.n_A)];
        sec.b_offset = b_offsets[static_cast<std::size_t>(n_B)];
        sec.global.assign(static_cast<std::size_t>(sec.d_A * sec.d_B), -1);
    }

    s.coordinates.resize(static_cast<std::size_t>(s.dim));
    for (Eigen::Index j = 0; j < s.dim; ++j) {
        const auto& occ = basis.state(j);
        OccupationVector front(occ.begin(), occ.begin() + l_A);
        OccupationVector back(occ.begin() + l_A, occ.end());
        const int n_A = std::accumulate(front.begin(), front.end(), 0);
        const int n_B = N - n_A;
        auto& sec = s.sectors[static_cast<std::size_t>(n_B)];
        const Eigen::Index a = a_basis[static_cast<std::size_t>(n_A)].index_of(front);
        const Eigen::Index b = b_basis[static_cast<std::size_t>(n_B)].index_of(back);
        sec.global[static_cast<std::size_t>(a * sec.d_B + b)] = j;
        s.coordinates[static_cast<std::size_t>(j)] = SectorCoordinate{n_A, n_B, a, b};
    }

    for (const auto& sec : s.sectors)
        for (Eigen::Index g : sec.global)
            if (g < 0) throw std::logic_error("split: sector grid not covered exactly once");

    long long total = 0;
    for (int i = 0; i <= N; ++i)
        total = checked_add(total, s.d_A_list[static_cast<std::size_t>(i)] *
                                       s.d_B_list[static_cast<std::size_t>(N - i)]);
    if (total != static_cast<long long>(s.dim))
        throw std::logic_error("split: dimension identity violated");
    return s;
}

// Bipartition of an L-qubit register at qubit l_A. Index convention: qubit 1 is the
// most significant bit, so index = a * 2^{l_B} + b with a over A and b over B.
inline BipartiteSplit qubit_split(int qubits, int l_A) {
    if (qubits < 2) throw std::invalid_argument("qubit_split: need at least two qubits");
    if (l_A < 1 || l_A > qubits - 1)
        throw std::invalid_argument("qubit_split: l_A must satisfy 1 <= l_A <= L-1");

    BipartiteSplit s;
    s.l_A = l_A;
    s.l_B = qubits - l_A;
    s.total_particles = 0;
    s.qubit_register = true;
    s.basis_tag = "qubits:L=" + std::to_string(qubits);
    s.dim = Eigen::Index{1} << qubits;
    s.dim_A = Eigen::Index{1} << l_A;
    s.dim_B = Eigen::Index{1} << s.l_B;
    s.d_A_list = {static_cast<long long>(s.dim_A)};
    s.d_B_list = {static_cast<long long>(s.dim_B)};

    SectorLayout sec;
    sec.n_A = 0;
    sec.n_B = 0;
    sec.d_A = s.dim_A;
    sec.d_B = s.dim_B;
    sec.global.resize(static_cast<std::size_t>(s.dim));
    std::iota(sec.global.begin(), sec.global.end(), Eigen::Index{0});
    s.sectors.push_back(std::move(sec));

    s.coordinates.resize(static_cast<std::size_t>(s.dim));
    for (Eigen::Index j = 0; j < s.dim; ++j)
        s.coordinates[static_cast<std::size_t>(j)] = SectorCoordinate{0, 0, j / s.dim_B, j % s.dim_B};
    return s;
}

// One n_B block of the bounded-particle-number (non-conserving) decomposition.
// The A side stacks every occupancy n_A = 0..N_max - n_B, ordered by n_A ascending.
struct NonconservingBlock {
    int n_B = 0;
    Eigen::Index d_A = 0;  // summed A-side dimension
    Eigen::Index d_B = 0;
    Eigen::Index dim = 0;
    std::vector<Eigen::Index> global;  // slot a * d_B + b -> index in the stacked basis

    Eigen::Index global_index(Eigen::Index a, Eigen::Index b) const {
        return global[static_cast<std::size_t>(a * d_B + b)];
    }
};

// Block structure of the direct sum of all n = 0..N_max fixed-number bases,
// regrouped by the particle number of B. The stacked basis concatenates the
// input bases in ascending n order.
struct NonconservingBlocks {
    int sites = 0;
    int l_A = 0;
    int n_max = 0;
    Eigen::Index total_dim = 0;
    std::string basis_tag;
    std::vector<NonconservingBlock> blocks;  // ordered by d_A descending (n_B ascending on ties)
};

inline NonconservingBlocks sector_blocks_for_nonconserving(const std::vector<FockBasis>& bases,
                                                           int l_A) {
    if (bases.empty())
        throw std::invalid_argument("sector_blocks_for_nonconserving: no bases given");
    const int L = bases.front().sites();
    const int n_max = static_cast<int>(bases.size()) - 1;
    for (int n = 0; n <= n_max; ++n) {
        const auto& b = bases[static_cast<std::size_t>(n)];
        if (b.sites() != L || b.particles() != n)
            throw std::invalid_argument(
                "sector_blocks_for_nonconserving: bases must cover n = 0..N_max for one lattice");
    }
    if (l_A < 1 || l_A > L - 1)
        throw std::invalid_argument("sector_blocks_for_nonconserving: l_A out of range");
    const int l_B = L - l_A;

    std::vector<Eigen::Index> offsets(static_cast<std::size_t>(n_max) + 1, 0);
    Eigen::Index total = 0;
    for (int n = 0; n <= n_max; ++n) {
        offsets[static_cast<std::size_t>(n)] = total;
        total += bases[static_cast<std::size_t>(n)].dim();
    }

    std::vector<FockBasis> a_basis, b_basis;
    for (int n = 0; n <= n_max; ++n) {
        a_basis.emplace_back(l_A, n);
        b_basis.emplace_back(l_B, n);
    }

    NonconservingBlocks out;
    out.sites = L;
    out.l_A = l_A;
    out.n_max = n_max;
    out.total_dim = total;
    out.basis_tag = "fock-mixed:L=" + std::to_string(L) + ",Nmax=" + std::to_string(n_max);

    for (int n_B = 0; n_B <= n_max; ++n_B) {
        NonconservingBlock blk;
        blk.n_B = n_B;
        blk.d_B = static_cast<Eigen::Index>(fock_dimension(l_B, n_B));
        Eigen::Index d_A = 0;
        for (int n_A = 0; n_A <= n_max - n_B; ++n_A)
            d_A += static_cast<Eigen::Index>(fock_dimension(l_A, n_A));
        blk.d_A = d_A;
        blk.dim = blk.d_A * blk.d_B;
        blk.global.assign(static_cast<std::size_t>(blk.dim), -1);

        Eigen::Index a = 0;
        for (int n_A = 0; n_A <= n_max - n_B; ++n_A) {
            const auto& ab = a_basis[static_cast<std::size_t>(n_A)];
            const auto& bb = b_basis[static_cast<std::size_t>(n_B)];
            const auto& full = bases[static_cast<std::size_t>(n_A + n_B)];
            for (Eigen::Index ia = 0; ia < ab.dim(); ++ia, ++a) {
                for (Eigen::Index ib = 0; ib < bb.dim(); ++ib) {
                    OccupationVector occ = ab.state(ia);
                    const auto& tail = bb.state(ib);
                    occ.insert(occ.end(), tail.begin(), tail.end());
                    blk.global[static_cast<std::size_t>(a * blk.d_B + ib)] =
                        offsets[static_cast<std::size_t>(n_A + n_B)] + full.index_of(occ);
                }
            }
        }
        for (Eigen::Index g : blk.global)
            if (g < 0) throw std::logic_error("sector_blocks_for_nonconserving: block grid incomplete");
        out.blocks.push_back(std::move(blk));
    }

    std::stable_sort(out.blocks.begin(), out.blocks.end(),
                     [](const NonconservingBlock& x, const NonconservingBlock& y) {
                         if (x.d_A != y.d_A) return x.d_A > y.d_A;
                         return x.n_B < y.n_B;
                     });
    return out;
}

}  // namespace qdistill
