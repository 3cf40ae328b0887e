#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "layerstack/domains.hpp"
#include "layerstack/errors.hpp"
#include "layerstack/vec.hpp"
#include "layerstack/verify.hpp"

namespace layerstack {

enum class PairClass { ISubsetJ, JSubsetI, Disjoint, Violation };

inline constexpr int kSentinel = -1;       // stands for the empty member closing every chain
inline constexpr int kSetSamples = 4096;   // default draw count for set predicates
inline constexpr std::uint64_t kSetSeed = 0x5EED;

namespace detail {

struct SampleBox {
    Vec lo, hi;
};

/// Joint sampling box: hull of the bounded shapes' boxes inflated by a
/// quarter diagonal; [-3,3]^n when nothing is bounded.
inline SampleBox sample_box(const std::vector<const ImplicitDomain*>& shapes, int n) {
    SampleBox box{Vec::zero(n), Vec::zero(n)};
    bool any = false;
    for (const ImplicitDomain* d : shapes) {
        if (!d->bounded()) continue;
        Vec lo, hi;
        d->bounding_box(lo, hi);
        if (!any) {
            box.lo = lo;
            box.hi = hi;
            any = true;
        } else {
            for (int i = 0; i < n; ++i) {
                box.lo[i] = std::min(box.lo[i], lo[i]);
                box.hi[i] = std::max(box.hi[i], hi[i]);
            }
        }
    }
    if (!any) {
        for (int i = 0; i < n; ++i) {
            box.lo[i] = -3.0;
            box.hi[i] = 3.0;
        }
        return box;
    }
    double pad = 0.0;
    for (int i = 0; i < n; ++i) pad = std::max(pad, box.hi[i] - box.lo[i]);
    pad = 0.25 * std::max(pad, 1e-6);
    for (int i = 0; i < n; ++i) {
        box.lo[i] -= pad;
        box.hi[i] += pad;
    }
    return box;
}

inline Vec box_draw(const SampleBox& box, int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec p = Vec::zero(n);
    for (int i = 0; i < n; ++i) p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * u(rng);
    return p;
}

/// Probes just inside a shape's boundary: guaranteed interior witnesses even
/// for shapes too small for the Monte-Carlo draw to hit.
inline std::vector<Vec> inward_probes(const ImplicitDomain& d, int count) {
    double scale = 1.0;
    if (d.bounded()) {
        Vec lo, hi;
        d.bounding_box(lo, hi);
        for (int i = 0; i < d.n; ++i) scale = std::max(scale * 0.0 + (hi[i] - lo[i]), scale);
    }
    std::vector<Vec> out;
    for (const Vec& b : d.boundary_points(count)) {
        Vec g = d.grad(b);
        double gn = norm(g);
        if (gn <= 0.0) continue;
        Vec p = b - (1e-3 * scale / gn) * g;
        if (d.level(p) < 0.0) out.push_back(p);
    }
    return out;
}

}  // namespace detail

/// Trichotomy classification by seeded sampling plus boundary-anchored
/// interior probes of both shapes.
inline PairClass classify_pair(const ImplicitDomain& Ui, const ImplicitDomain& Uj, int samples = kSetSamples) {
    int n = Ui.n;
    if (n != Uj.n) throw InputError("pair classification across dimensions");
    std::mt19937_64 rng(kSetSeed);
    detail::SampleBox box = detail::sample_box({&Ui, &Uj}, n);

    const double band = 1e-9;
    long ii = 0, jj = 0, bb = 0;
    auto tally = [&](const Vec& p) {
        double li = Ui.level(p), lj = Uj.level(p);
        if (std::abs(li) <= band || std::abs(lj) <= band) return;
        bool in_i = li < 0.0, in_j = lj < 0.0;
        if (in_i && in_j)
            ++bb;
        else if (in_i)
            ++ii;
        else if (in_j)
            ++jj;
    };
    for (int s = 0; s < samples; ++s) tally(detail::box_draw(box, n, rng));
    for (const Vec& p : detail::inward_probes(Ui, 128)) tally(p);
    for (const Vec& p : detail::inward_probes(Uj, 128)) tally(p);
    for (const Vec& b : Ui.boundary_points(128)) tally(b);
    for (const Vec& b : Uj.boundary_points(128)) tally(b);

    if (ii > 0 && jj > 0 && bb > 0) return PairClass::Violation;
    if (ii == 0 && bb > 0 && jj > 0) return PairClass::ISubsetJ;
    if (jj == 0 && bb > 0 && ii > 0) return PairClass::JSubsetI;
    if (bb == 0 && ii > 0 && jj > 0) return PairClass::Disjoint;
    throw Inconclusive("pair classification counters degenerate (i-only " + std::to_string(ii) + ", j-only " +
                       std::to_string(jj) + ", both " + std::to_string(bb) + ")");
}

/// Composite domain: U_0 with nested-or-disjoint members, the classification
/// matrix, and the containment forest. Immutable once built.
struct CompositeScene {
    std::vector<ImplicitDomain> members;  // members[0] = the composite U_0
    HolderBudget budget;
    std::vector<std::vector<PairClass>> pairs;
    std::vector<int> parent;  // minimal strict superset; kSentinel for U_0
    bool valid = true;

    int count() const { return static_cast<int>(members.size()); }
    bool subset_of(int i, int j) const { return i != j && pairs[i][j] == PairClass::ISubsetJ; }
};

inline std::vector<int> containment_forest(const CompositeScene& sc) {
    std::vector<int> parent(sc.members.size(), kSentinel);
    for (int i = 1; i < sc.count(); ++i) {
        int best = 0;
        for (int j = 1; j < sc.count(); ++j) {
            if (!sc.subset_of(i, j)) continue;
            if (sc.subset_of(j, best) || best == 0) best = j;
        }
        parent[i] = best;
    }
    return parent;
}

namespace detail {

inline CompositeScene build_scene(std::vector<ImplicitDomain> members, const HolderBudget& budget, bool checked) {
    if (members.empty()) throw InputError("composite scene needs at least U_0");
    budget.validate();
    CompositeScene sc;
    sc.members = std::move(members);
    sc.budget = budget;
    int K = sc.count();
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j)
            if (sc.members[i].same_geometry(sc.members[j]))
                throw DuplicateShape("members " + std::to_string(i) + " and " + std::to_string(j) +
                                     " are the same shape");

    sc.pairs.assign(K, std::vector<PairClass>(K, PairClass::Disjoint));
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j) {
            PairClass c = classify_pair(sc.members[i], sc.members[j]);
            sc.pairs[i][j] = c;
            sc.pairs[j][i] = c == PairClass::ISubsetJ   ? PairClass::JSubsetI
                             : c == PairClass::JSubsetI ? PairClass::ISubsetJ
                                                        : c;
            if (!checked) {
                if (c == PairClass::Violation) sc.valid = false;
                continue;
            }
            if (c == PairClass::Violation)
                throw TrichotomyViolation("members " + std::to_string(i) + " and " + std::to_string(j) +
                                          " overlap without nesting");
            if (j >= 1 && i == 0 && c != PairClass::JSubsetI)
                throw InputError("member " + std::to_string(j) + " is not inside the composite U_0");
        }
    sc.parent = containment_forest(sc);
    return sc;
}

}  // namespace detail

inline CompositeScene make_scene(std::vector<ImplicitDomain> members, const HolderBudget& budget) {
    return detail::build_scene(std::move(members), budget, true);
}

/// Classifies but never throws on trichotomy violations; for negative
/// controls that need a deliberately broken scene.
inline CompositeScene make_scene_unchecked(std::vector<ImplicitDomain> members, const HolderBudget& budget) {
    return detail::build_scene(std::move(members), budget, false);
}

/// Component of p: the minimal member containing p (members are open; points
/// on an internal interface belong to the surrounding component).
inline int component_membership(const CompositeScene& sc, const Vec& p) {
    if (!(sc.members[0].level(p) < 0.0)) throw OutsideComposite("point is not inside the composite");
    int best = 0;
    for (int i = 1; i < sc.count(); ++i) {
        if (!(sc.members[i].level(p) < 0.0)) continue;
        if (best == 0 || sc.subset_of(i, best)) {
            best = i;
        } else if (!sc.subset_of(best, i)) {
            throw TrichotomyViolation("containing members " + std::to_string(i) + " and " + std::to_string(best) +
                                      " are not nested");
        }
    }
    return best;
}

enum class WState { In, Out, Band };

/// Direct-definition membership in W_j = U_j minus its strict sub-members.
inline WState component_state(const CompositeScene& sc, int j, const Vec& p, double band = 1e-8) {
    double lj = sc.members[j].level(p);
    if (std::abs(lj) <= band) return WState::Band;
    if (lj > 0.0) return WState::Out;
    for (int i = 1; i < sc.count(); ++i) {
        if (!sc.subset_of(i, j)) continue;
        double li = sc.members[i].level(p);
        if (std::abs(li) <= band) return WState::Band;
        if (li < 0.0) return WState::Out;
    }
    return WState::In;
}

struct PartitionReport {
    long checked = 0;
    long misses = 0;
    long double_counts = 0;
    long band_skipped = 0;
    std::vector<Vec> witnesses;
    bool pass() const { return checked > 0 && misses == 0 && double_counts == 0; }
};

/// Every sampled composite point must land in exactly one component, counted
/// from the definitions (not the forest).
inline PartitionReport partition_check(const CompositeScene& sc, int samples = 10000) {
    std::mt19937_64 rng(kSetSeed);
    std::vector<const ImplicitDomain*> ptrs;
    for (const auto& m : sc.members) ptrs.push_back(&m);
    detail::SampleBox box = detail::sample_box(ptrs, sc.members[0].n);

    PartitionReport rep;
    for (int s = 0; s < samples; ++s) {
        Vec p = detail::box_draw(box, sc.members[0].n, rng);
        if (!(sc.members[0].level(p) < -1e-8)) continue;
        int hits = 0;
        bool banded = false;
        for (int j = 0; j < sc.count(); ++j) {
            WState w = component_state(sc, j, p);
            if (w == WState::Band) banded = true;
            if (w == WState::In) ++hits;
        }
        if (banded) {
            ++rep.band_skipped;
            continue;
        }
        ++rep.checked;
        if (hits == 1) continue;
        (hits == 0 ? rep.misses : rep.double_counts) += 1;
        if (rep.witnesses.size() < 8) rep.witnesses.push_back(p);
    }
    return rep;
}

namespace detail {

inline std::vector<Vec> trace_samples(const CompositeScene& sc, const Vec& center, double R, int samples) {
    std::mt19937_64 rng(kSetSeed);
    std::uniform_real_distribution<double> u(-R, R);
    std::vector<Vec> out;
    int n = sc.members[0].n;
    for (int s = 0; s < samples; ++s) {
        Vec p = Vec::zero(n);
        for (int i = 0; i < n; ++i) p[i] = u(rng);
        if (norm2(p) > R * R) continue;
        p = p + center;
        if (sc.members[0].level(p) < -1e-12) out.push_back(p);
    }
    return out;
}

inline bool member_meets_ball(const ImplicitDomain& d, const Vec& center, double R) {
    if (d.level(center) < 0.0) return true;
    if (boundary_meets_ball(d, center, R)) return true;
    std::mt19937_64 rng(kSetSeed);
    std::uniform_real_distribution<double> u(-R, R);
    for (int s = 0; s < 2048; ++s) {
        Vec p = Vec::zero(d.n);
        for (int i = 0; i < d.n; ++i) p[i] = u(rng);
        if (norm2(p) > R * R) continue;
        if (d.level(p + center) < 0.0) return true;
    }
    return false;
}

}  // namespace detail

/// Minimal member whose trace on the closed ball contains the composite's
/// trace. A member whose boundary meets the closed ball cannot cover: the
/// contact point witnesses trace outside the open member.
inline int minimal_cover(const CompositeScene& sc, const Vec& center, double R) {
    std::vector<Vec> trace = detail::trace_samples(sc, center, R, kSetSamples);
    if (trace.empty()) throw SamplingInconclusive("no composite points found in the ball");

    std::vector<int> qualified{0};
    for (int j = 1; j < sc.count(); ++j) {
        bool escapes = false;
        for (const Vec& p : trace)
            if (sc.members[j].level(p) > 1e-9) {
                escapes = true;
                break;
            }
        if (escapes) continue;
        if (boundary_meets_ball(sc.members[j], center, R)) continue;
        qualified.push_back(j);
    }
    for (int j : qualified) {
        bool minimal = true;
        for (int q : qualified)
            if (q != j && !sc.subset_of(j, q)) {
                minimal = false;
                break;
            }
        if (minimal) return j;
    }
    throw SamplingInconclusive("cover candidates are not totally ordered");
}

/// Union of ball-meeting strict sub-members of U_j, which in regime is a
/// single member: the unique maximal one. Sentinel when none meet.
inline int inner_union(const CompositeScene& sc, int j, const Vec& center, double R) {
    std::vector<int> meeting;
    for (int i = 1; i < sc.count(); ++i)
        if (sc.subset_of(i, j) && detail::member_meets_ball(sc.members[i], center, R)) meeting.push_back(i);
    if (meeting.empty()) return kSentinel;
    std::vector<int> maximal;
    for (int i : meeting) {
        bool top = true;
        for (int q : meeting)
            if (q != i && sc.subset_of(i, q)) {
                top = false;
                break;
            }
        if (top) maximal.push_back(i);
    }
    if (maximal.size() == 1) return maximal[0];
    throw UnionNotInS("ball-meeting sub-members " + std::to_string(maximal[0]) + " and " +
                      std::to_string(maximal[1]) + " of member " + std::to_string(j) +
                      " are disjoint; their union is not a member (radius beyond the regime?)");
}

struct SplitCover {
    int j = 0;              // minimal cover
    int k = kSentinel;      // first cluster (smaller index)
    int l = kSentinel;      // second cluster
};

/// Cover plus the at-most-two maximal ball-meeting clusters beneath it.
inline SplitCover split_cover(const CompositeScene& sc, const Vec& center, double R) {
    SplitCover out;
    out.j = minimal_cover(sc, center, R);
    std::vector<int> meeting;
    for (int i = 1; i < sc.count(); ++i)
        if (sc.subset_of(i, out.j) && detail::member_meets_ball(sc.members[i], center, R)) meeting.push_back(i);
    std::vector<int> maximal;
    for (int i : meeting) {
        bool top = true;
        for (int q : meeting)
            if (q != i && sc.subset_of(i, q)) {
                top = false;
                break;
            }
        if (top) maximal.push_back(i);
    }
    std::sort(maximal.begin(), maximal.end());
    if (maximal.size() > 2)
        throw MoreThanTwoClusters("members " + std::to_string(maximal[0]) + ", " + std::to_string(maximal[1]) +
                                  ", " + std::to_string(maximal[2]) + " all meet the ball");
    if (maximal.size() >= 1) out.k = maximal[0];
    if (maximal.size() == 2) out.l = maximal[1];
    return out;
}

/// Strictly nested chain i_{-m} ... i_0 ... i_l tiling the trace; slot 0 is
/// the minimal cover, both sides descend into nested clusters.
struct LayerChain {
    Vec center;
    double R = 0.0;
    int m = 0, l = 0;
    std::vector<int> slots;  // slots[m + d] = i_d for d in [-m, l]
    bool boundary_mode = false;
    bool side_swapped = false;

    int at(int d) const { return slots[static_cast<std::size_t>(m + d)]; }
};

inline LayerChain chain_decompose(const CompositeScene& sc, const Vec& center, double R) {
    const ImplicitDomain& U0 = sc.members[0];
    bool boundary_mode = boundary_meets_ball(U0, center, R);
    if (!(U0.level(center) < 0.0) && !boundary_mode)
        throw OutsideComposite("ball does not meet the composite");

    SplitCover scv = split_cover(sc, center, R);
    if (boundary_mode && scv.l != kSentinel)
        throw MoreThanTwoClusters("composite boundary occupies a cluster slot, but members " +
                                  std::to_string(scv.k) + " and " + std::to_string(scv.l) + " both meet the ball");

    int plus_head = kSentinel, minus_head = kSentinel;
    bool swapped = false;
    if (scv.l != kSentinel) {
        plus_head = scv.k;
        minus_head = scv.l;
        if (sc.members[scv.l].level(center) < 0.0) {
            std::swap(plus_head, minus_head);
            swapped = true;
        }
    } else if (scv.k != kSentinel) {
        if (boundary_mode || sc.members[scv.k].level(center) < 0.0) {
            plus_head = scv.k;
        } else {
            minus_head = scv.k;
            swapped = true;
        }
    }

    std::vector<int> plus, minus;
    for (int h = plus_head; h != kSentinel; h = inner_union(sc, h, center, R)) plus.push_back(h);
    for (int h = minus_head; h != kSentinel; h = inner_union(sc, h, center, R)) minus.push_back(h);
    if (boundary_mode && !minus.empty())
        throw MoreThanTwoClusters("boundary ball produced a minus side");

    LayerChain chain;
    chain.center = center;
    chain.R = R;
    chain.boundary_mode = boundary_mode;
    chain.side_swapped = swapped;
    chain.m = static_cast<int>(minus.size());
    chain.l = static_cast<int>(plus.size());
    chain.slots.assign(minus.rbegin(), minus.rend());
    chain.slots.push_back(scv.j);
    chain.slots.insert(chain.slots.end(), plus.begin(), plus.end());

    for (int d = 0; d < chain.l; ++d)
        if (!sc.subset_of(chain.at(d + 1), chain.at(d)))
            throw TrichotomyViolation("chain is not strictly nested on the plus side");
    for (int d = 0; d > -chain.m; --d)
        if (!sc.subset_of(chain.at(d - 1), chain.at(d)))
            throw TrichotomyViolation("chain is not strictly nested on the minus side");
    return chain;
}

}  // namespace layerstack
