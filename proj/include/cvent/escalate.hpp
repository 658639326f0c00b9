#pragma once

// Escalating verification: compress a state onto the leading n_s < d basis
// vectors of every mode, test the compression, and grow d until a criterion
// certifies or the budget runs out. A certificate found on a compression is
// also a certificate for the full state, so "entangled" at any d is final;
// running out of budget is only ever "undecided".

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cvent/criteria.hpp"
#include "cvent/errors.hpp"
#include "cvent/linalg.hpp"
#include "cvent/states.hpp"

namespace cvent {

/// Captured traces at or below this are treated as missing the support.
inline constexpr double kZeroCapture = 1e-14;

enum class Family { chik, tmsv, partial_ent, ghz };

/// A pure state known through its Fock amplitudes, emitted at any
/// truncation. Every emission is the compression of the same vector, so
/// truncating an emission at D down to d gives the emission at d.
struct AnalyticFamily {
    Family family = Family::chik;
    std::size_t k = 1;          // chik
    double lambda = 0.0;        // tmsv
    std::size_t num_modes = 2;  // ghz; fixed at 2 / 3 for the others

    std::size_t modes() const {
        switch (family) {
            case Family::partial_ent: return 3;
            case Family::ghz: return num_modes;
            default: return 2;
        }
    }

    void check() const {
        if (family == Family::chik && k < 1) throw ContractViolation("chik family needs k >= 1");
        if (family == Family::tmsv) check_tmsv_lambda(lambda);
        if (family == Family::ghz && num_modes < 2) throw ContractViolation("ghz family needs >= 2 modes");
    }

    cplx amplitude(const std::vector<std::size_t>& t) const {
        const double h = 1.0 / std::sqrt(2.0);
        auto all_equal = [&](std::size_t v) { return std::all_of(t.begin(), t.end(), [v](auto x) { return x == v; }); };
        switch (family) {
            case Family::chik: return (t[0] == t[1] && (t[0] == 0 || t[0] == k)) ? h : 0.0;
            case Family::tmsv: return t[0] == t[1] ? tmsv_amplitude(lambda, t[0]) : 0.0;
            case Family::partial_ent: return (t[0] == 0 && t[1] == t[2] && t[1] <= 1) ? h : 0.0;
            case Family::ghz: return (all_equal(0) || all_equal(1)) ? h : 0.0;
        }
        return 0.0;
    }

    PureStateVec emit_vector(const std::vector<std::size_t>& dims) const {
        check();
        if (dims.size() != modes())
            throw ContractViolation("family has " + std::to_string(modes()) + " modes, got " +
                                    std::to_string(dims.size()) + " dims");
        CompositeIndexMap map(dims);
        ComplexVector a(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) a(i) = amplitude(map.tuple(i));
        return {map, a};
    }

    DensityState emit(const std::vector<std::size_t>& dims) const {
        auto v = emit_vector(dims);
        ComplexMatrix m = v.amplitudes * v.amplitudes.adjoint();
        return DensityState::trusted(v.map, std::move(m), true);
    }

    std::string describe() const {
        std::ostringstream os;
        switch (family) {
            case Family::chik: os << "chik k=" << k; break;
            case Family::tmsv: os << "tmsv lambda=" << lambda; break;
            case Family::partial_ent: os << "partial-ent"; break;
            case Family::ghz: os << "ghz modes=" << num_modes; break;
        }
        return os.str();
    }
};

/// A state given at fixed ambient dimensions.
struct FiniteSource {
    DensityState state;
};

using StateProvider = std::variant<FiniteSource, AnalyticFamily>;

inline std::size_t num_modes(const StateProvider& p) {
    if (const auto* f = std::get_if<FiniteSource>(&p)) return f->state.num_modes();
    return std::get<AnalyticFamily>(p).modes();
}

/// Ambient dims of a finite source; nullopt for analytic families.
inline std::optional<std::vector<std::size_t>> ambient_dims(const StateProvider& p) {
    if (const auto* f = std::get_if<FiniteSource>(&p)) return f->state.map().dims();
    return std::nullopt;
}

struct TruncationResult {
    DensityState reduced;
    double captured_trace = 0.0;
    std::vector<std::size_t> dims_used;
};

/// (P_1 (x) ... (x) P_M) rho (P_1 (x) ... (x) P_M) with P_s the projector
/// on the first dims_s basis vectors of mode s.
inline TruncationResult truncate(const StateProvider& source, const std::vector<std::size_t>& dims) {
    if (dims.size() != num_modes(source))
        throw ContractViolation("truncate: " + std::to_string(dims.size()) + " dims for a " +
                                std::to_string(num_modes(source)) + "-mode source");
    for (auto d : dims)
        if (d < 1) throw ContractViolation("truncate: dimensions must be >= 1");
    DensityState reduced;
    if (const auto* f = std::get_if<FiniteSource>(&source)) {
        const auto& amb = f->state.map().dims();
        for (std::size_t s = 0; s < dims.size(); ++s)
            if (dims[s] > amb[s])
                throw ContractViolation("truncate: dim " + std::to_string(dims[s]) + " of mode " + std::to_string(s) +
                                        " exceeds ambient " + std::to_string(amb[s]));
        reduced = DensityState::trusted(CompositeIndexMap(dims), principal_block(f->state.matrix(), f->state.map(), dims),
                                        true);
    } else {
        reduced = std::get<AnalyticFamily>(source).emit(dims);
    }
    double tr = reduced.trace();
    return {std::move(reduced), tr, dims};
}

enum class Growth { increment, doubling };
enum class Criterion { ppt, realign, witness };

inline const char* to_string(Growth g) { return g == Growth::increment ? "inc" : "double"; }

inline const char* to_string(Criterion c) {
    switch (c) {
        case Criterion::ppt: return "ppt";
        case Criterion::realign: return "realign";
        case Criterion::witness: return "witness";
    }
    return "?";
}

inline Criterion parse_criterion(const std::string& s) {
    if (s == "ppt") return Criterion::ppt;
    if (s == "realign") return Criterion::realign;
    if (s == "witness") return Criterion::witness;
    throw ContractViolation("unknown criterion '" + s + "' (expected ppt, realign or witness)");
}

struct EscalationConfig {
    std::size_t d_start = 1;
    std::size_t d_max = 8;
    Growth growth = Growth::increment;
    std::vector<Criterion> criteria{Criterion::ppt, Criterion::realign, Criterion::witness};
    double tol_detect = kTolDetect;
    std::optional<Bipartition> partition;  // default {0} | {1..M-1}

    void check() const {
        if (d_start < 1) throw ContractViolation("escalation: d_start must be >= 1");
        if (d_start > d_max)
            throw ContractViolation("escalation: d_start " + std::to_string(d_start) + " exceeds d_max " +
                                    std::to_string(d_max));
        if (criteria.empty()) throw ContractViolation("escalation: no criteria configured");
        if (!(tol_detect >= 0.0)) throw ContractViolation("escalation: tol_detect must be >= 0");
    }

    std::size_t next(std::size_t d) const {
        std::size_t n = growth == Growth::increment ? d + 1 : 2 * d;
        return std::min(n, d_max);
    }
};

struct StepRecord {
    std::vector<std::size_t> dims;
    double captured_trace = 0.0;
    bool skipped = false;
    std::vector<CriterionResult> results;
};

struct Entangled {
    std::vector<std::size_t> dims;
    Certificate certificate;        // lifted to the ambient dims when the source has them
    Certificate local_certificate;  // on the detecting truncation
    std::string criterion;
};

struct Undecided {
    std::vector<std::size_t> dims_max;
    std::string diagnostics;
};

struct Verdict {
    std::variant<Entangled, Undecided> outcome;
    Bipartition partition;
    std::vector<StepRecord> history;

    bool entangled() const { return std::holds_alternative<Entangled>(outcome); }
    const Entangled& as_entangled() const { return std::get<Entangled>(outcome); }
    const Undecided& as_undecided() const { return std::get<Undecided>(outcome); }

    std::vector<std::pair<std::vector<std::size_t>, double>> trace_capture_history() const {
        std::vector<std::pair<std::vector<std::size_t>, double>> out;
        for (const auto& s : history) out.emplace_back(s.dims, s.captured_trace);
        return out;
    }
};

namespace detail {

inline std::string dims_string(const std::vector<std::size_t>& d) { return join(d); }

/// Runs one criterion; returns a certificate when it certifies with positive margin.
inline std::optional<Certificate> run_criterion(Criterion c, const DensityState& rho, const Bipartition& bip,
                                                double tol, std::vector<CriterionResult>& results) {
    switch (c) {
        case Criterion::ppt: {
            auto r = ppt_check(rho, bip, tol);
            results.push_back(r);
            if (r.entangled()) return make_certificate(rho, extract_pt_witness(rho, bip, tol), "ppt");
            return std::nullopt;
        }
        case Criterion::realign: {
            auto r = realignment_check(rho, bip, tol);
            results.push_back(r);
            if (r.entangled()) {
                auto cert = make_certificate(rho, extract_realignment_witness(rho, bip), "realign");
                if (cert.margin > 0.0) return cert;
            }
            return std::nullopt;
        }
        case Criterion::witness: {
            auto [r, w] = witness_check(rho, bip, tol);
            results.push_back(r);
            if (r.entangled()) return make_certificate(rho, std::move(w), "witness");
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Grows d from d_start (uniformly on every mode, capped at a finite
/// source's ambient dims) and stops at the first certifying criterion.
inline Verdict verify_escalating(const StateProvider& source, const EscalationConfig& config) {
    config.check();
    if (const auto* a = std::get_if<AnalyticFamily>(&source)) a->check();
    const std::size_t m = num_modes(source);
    if (m < 2) throw ContractViolation("verify_escalating: needs at least 2 modes");
    Bipartition bip = config.partition.value_or(Bipartition::first_vs_rest(m));
    bip.check(m);
    const auto amb = ambient_dims(source);

    Verdict verdict{Undecided{}, bip, {}};
    std::vector<std::size_t> prev;
    std::size_t skipped = 0;
    for (std::size_t d = config.d_start;; d = config.next(d)) {
        std::vector<std::size_t> dims(m, d);
        if (amb)
            for (std::size_t s = 0; s < m; ++s) dims[s] = std::min(dims[s], (*amb)[s]);
        if (dims == prev) break;  // ambient dims reached, nothing new to see
        prev = dims;

        TruncationResult tr;
        try {
            tr = truncate(source, dims);
        } catch (const Error& e) {
            throw Error("truncation at d=" + std::to_string(d) + ": " + e.what());
        }
        StepRecord step{dims, tr.captured_trace, false, {}};
        if (tr.captured_trace <= kZeroCapture) {
            step.skipped = true;
            ++skipped;
            verdict.history.push_back(std::move(step));
        } else {
            for (auto c : config.criteria) {
                std::optional<Certificate> cert;
                try {
                    cert = detail::run_criterion(c, tr.reduced, bip, config.tol_detect, step.results);
                } catch (const Error& e) {
                    throw Error(std::string("criterion ") + to_string(c) + " at d=" + std::to_string(d) + ": " + e.what());
                }
                if (cert) {
                    Entangled ent{dims, *cert, *cert, to_string(c)};
                    if (amb && *amb != dims) ent.certificate = lift_certificate(*cert, *amb);
                    verdict.history.push_back(std::move(step));
                    verdict.outcome = std::move(ent);
                    return verdict;
                }
            }
            verdict.history.push_back(std::move(step));
        }
        if (d >= config.d_max) break;
    }

    std::ostringstream diag;
    diag << "no criterion certified up to dims " << detail::dims_string(prev) << " (" << verdict.history.size()
         << " steps";
    if (skipped) diag << ", " << skipped << " skipped for zero captured trace";
    diag << ")";
    verdict.outcome = Undecided{prev, diag.str()};
    return verdict;
}

/// All 2^(M-1) - 1 splits; `first` always holds mode 0, ordered by size then
/// lexicographically.
inline std::vector<Bipartition> bipartitions(std::size_t num_modes) {
    if (num_modes < 2) throw ContractViolation("bipartitions: need at least 2 modes");
    if (num_modes > 24) throw ContractViolation("bipartitions: too many modes to enumerate");
    std::vector<Bipartition> out;
    const std::uint64_t rest = (std::uint64_t(1) << (num_modes - 1)) - 1;
    for (std::uint64_t mask = 0; mask < rest; ++mask) {
        Bipartition b;
        b.first.push_back(0);
        for (std::size_t s = 1; s < num_modes; ++s) ((mask >> (s - 1)) & 1 ? b.first : b.second).push_back(s);
        out.push_back(std::move(b));
    }
    std::sort(out.begin(), out.end(), [](const Bipartition& x, const Bipartition& y) {
        if (x.first.size() != y.first.size()) return x.first.size() < y.first.size();
        return x.first < y.first;
    });
    return out;
}

struct ScanResult {
    std::vector<std::pair<Bipartition, Verdict>> verdicts;  // canonical bipartition order

    bool any_entangled() const {
        return std::any_of(verdicts.begin(), verdicts.end(), [](const auto& p) { return p.second.entangled(); });
    }
};

/// verify_escalating on every bipartition. The state counts as entangled
/// if any split certifies. Splits run concurrently.
inline ScanResult multipartite_scan(const StateProvider& source, const EscalationConfig& config) {
    config.check();
    auto parts = bipartitions(num_modes(source));
    const std::size_t width = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    ScanResult out;
    for (std::size_t lo = 0; lo < parts.size(); lo += width) {
        std::vector<std::future<Verdict>> jobs;
        for (std::size_t i = lo; i < std::min(parts.size(), lo + width); ++i) {
            EscalationConfig c = config;
            c.partition = parts[i];
            jobs.push_back(std::async(std::launch::async, [&source, c] { return verify_escalating(source, c); }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) out.verdicts.emplace_back(parts[lo + i], jobs[i].get());
    }
    return out;
}

}  // namespace cvent
