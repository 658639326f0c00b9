#pragma once

// Command-line front end. Reports are line-oriented key=value records on
// standard output; sweeps additionally write a CSV file.
//
// Exit codes: 0 run complete (and --expect met), 1 usage / IO / config
// error, 3 verdict did not match --expect.
//
// The default seed can be overridden with the CVENT_SEED environment variable.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvent/criteria.hpp"
#include "cvent/escalate.hpp"
#include "cvent/qstate_io.hpp"
#include "cvent/states.hpp"

namespace cvent::cli {

inline constexpr const char* kReportFormat = "cvent-report/1";
inline constexpr const char* kSeedEnv = "CVENT_SEED";
inline constexpr const char* kCsvHeader = "param,d,criterion,value,verdict,captured_trace";

enum ExitCode : int { kOk = 0, kUsage = 1, kExpectationMismatch = 3 };

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string dims_str(const std::vector<std::size_t>& d) { return detail::join(d); }

/// key=value records; one record per line, fields separated by spaces.
class RunReport {
public:
    explicit RunReport(std::ostream& out) : out_(out), start_(std::chrono::steady_clock::now()) {
        out_ << "format=" << kReportFormat << '\n';
    }

    void kv(const std::string& key, const std::string& value) { out_ << key << '=' << value << '\n'; }
    void kv(const std::string& key, double value) { kv(key, num(value)); }
    void line(const std::string& text) { out_ << text << '\n'; }

    void finish() {
        auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        out_ << "wall_ms=" << num(ms) << '\n';
    }

private:
    std::ostream& out_;
    std::chrono::steady_clock::time_point start_;
};

inline std::uint64_t default_seed() {
    if (const char* env = std::getenv(kSeedEnv)) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw ContractViolation(std::string(kSeedEnv) + " is not an unsigned integer");
        return v;
    }
    return kDefaultSeed;
}

struct FamilyOptions {
    std::string family;
    std::size_t k = 1;
    std::size_t dim = 0;
    double lambda = 0.0;
    double p = 0.0;
    std::size_t modes = 3;
    std::size_t terms = 1;
    std::vector<std::size_t> dims;
    std::uint64_t seed = kDefaultSeed;

    std::string echo() const {
        std::ostringstream os;
        os << "family=" << family;
        if (family == "chik") os << " k=" << k;
        if (family == "tmsv") os << " lambda=" << num(lambda);
        if (family == "isotropic") os << " p=" << num(p);
        if (family == "ghz") os << " modes=" << modes;
        if (family == "separable-random") os << " terms=" << terms << " dims=" << dims_str(dims);
        if (dim) os << " dim=" << dim;
        return os.str();
    }
};

inline const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names{"chik", "tmsv", "isotropic", "partial-ent", "ghz", "separable-random"};
    return names;
}

inline void add_family_options(CLI::App* sub, FamilyOptions& f) {
    sub->add_option("--k", f.k, "chik: excited level k");
    sub->add_option("--dim", f.dim, "local dimension per mode");
    sub->add_option("--lambda", f.lambda, "tmsv: squeezing parameter in [0,1)");
    sub->add_option("--p", f.p, "isotropic: mixing weight in [0,1]");
    sub->add_option("--modes", f.modes, "ghz: number of modes");
    sub->add_option("--terms", f.terms, "separable-random: number of product terms");
    sub->add_option("--dims", f.dims, "separable-random: per-mode dims, e.g. 3,3")->delimiter(',');
}

inline std::size_t require_dim(const FamilyOptions& f) {
    if (f.dim == 0) throw ContractViolation("family " + f.family + " needs --dim");
    return f.dim;
}

/// The state a family denotes at the requested --dim.
inline QState generate(const FamilyOptions& f) {
    if (f.family == "chik") return gen_chik(f.k, require_dim(f));
    if (f.family == "tmsv") return gen_tmsv(f.lambda, require_dim(f));
    if (f.family == "isotropic") return gen_isotropic(f.p, require_dim(f));
    if (f.family == "partial-ent") return gen_partial_ent(f.dim ? f.dim : 2);
    if (f.family == "ghz") return gen_ghz(f.modes, f.dim ? f.dim : 2);
    if (f.family == "separable-random") {
        if (f.dims.empty()) throw ContractViolation("separable-random needs --dims");
        return gen_separable_random(f.terms, f.dims, f.seed).assemble();
    }
    throw ContractViolation("unknown family '" + f.family + "'");
}

/// Fock families become analytic providers (truncatable at any d); the
/// finite families become fixed sources.
inline StateProvider provider_for(const FamilyOptions& f) {
    AnalyticFamily a;
    if (f.family == "chik") {
        a.family = Family::chik;
        a.k = f.k;
    } else if (f.family == "tmsv") {
        a.family = Family::tmsv;
        a.lambda = f.lambda;
    } else if (f.family == "partial-ent") {
        a.family = Family::partial_ent;
    } else if (f.family == "ghz") {
        a.family = Family::ghz;
        a.num_modes = f.modes;
    } else {
        return FiniteSource{as_density(generate(f))};
    }
    a.check();
    return a;
}

inline std::vector<Criterion> parse_criteria(const std::vector<std::string>& names) {
    std::vector<Criterion> out;
    for (const auto& n : names) out.push_back(parse_criterion(n));
    if (out.empty()) throw ContractViolation("no criteria given");
    return out;
}

inline std::string result_fields(const CriterionResult& r) {
    std::ostringstream os;
    os << "criterion=" << r.criterion << " value=" << num(r.value) << " threshold=" << num(r.threshold)
       << " verdict=" << to_string(r.verdict);
    for (const auto& [k, v] : r.detail) os << ' ' << k << '=' << num(v);
    return os.str();
}

inline void report_verdict(RunReport& rep, const Verdict& v, std::size_t d_start, const EscalationConfig& cfg) {
    std::size_t d = d_start;
    for (const auto& step : v.history) {
        std::ostringstream pre;
        pre << "step partition=" << v.partition.label() << " d=" << d << " dims=" << dims_str(step.dims)
            << " captured_trace=" << num(step.captured_trace);
        if (step.skipped) rep.line(pre.str() + " skipped=1");
        for (const auto& r : step.results) rep.line(pre.str() + ' ' + result_fields(r));
        d = cfg.next(d);
    }
    std::ostringstream os;
    os << "verdict partition=" << v.partition.label();
    if (v.entangled()) {
        const auto& e = v.as_entangled();
        const auto& c = e.certificate;
        os << " outcome=entangled dims=" << dims_str(e.dims) << " criterion=" << e.criterion
           << " measured=" << num(c.measured_value) << " sep_bound=" << num(c.witness.sep_bound)
           << " margin=" << num(c.margin) << " bound_kind=" << to_string(c.witness.kind)
           << " subspace_dims=" << dims_str(c.subspace_dims) << " lifted=" << (c.lifted ? 1 : 0);
        if (c.lifted) os << " lifted_dims=" << dims_str(c.witness.map.dims());
    } else {
        const auto& u = v.as_undecided();
        os << " outcome=undecided dims_max=" << dims_str(u.dims_max) << " diagnostics=\"" << u.diagnostics << '"';
    }
    rep.line(os.str());
}

struct Sweep {
    std::string family;
    double start = 0.0, stop = 0.0, step = 0.0;
    std::size_t dim = 0, dmin = 0, dmax = 0;
    std::vector<Criterion> criteria;
    double tol_detect = kTolDetect;
};

/// One CSV row per (param, d, criterion), in that nesting order.
inline std::vector<std::string> sweep_rows(const Sweep& s) {
    if (!(s.step > 0.0)) throw ContractViolation("sweep: --step must be positive");
    std::size_t lo = s.dim, hi = s.dim;
    if (s.dmax) {
        lo = s.dmin ? s.dmin : 1;
        hi = s.dmax;
    }
    if (lo == 0) throw ContractViolation("sweep: give --dim or --dmax");
    if (lo > hi) throw ContractViolation("sweep: --dmin exceeds --dmax");
    if (s.family != "isotropic" && s.family != "tmsv")
        throw ContractViolation("sweep: family must be isotropic or tmsv");

    std::vector<std::string> rows;
    if (s.stop < s.start) return rows;
    const auto count = std::size_t(std::floor((s.stop - s.start) / s.step + 1e-9)) + 1;
    const Bipartition bip{{0}, {1}};
    for (std::size_t i = 0; i < count; ++i) {
        const double param = s.start + double(i) * s.step;
        for (std::size_t d = lo; d <= hi; ++d) {
            DensityState rho = s.family == "isotropic" ? gen_isotropic(param, d) : gen_tmsv(param, d);
            for (auto c : s.criteria) {
                CriterionResult r;
                switch (c) {
                    case Criterion::ppt: r = ppt_check(rho, bip, s.tol_detect); break;
                    case Criterion::realign: r = realignment_check(rho, bip, s.tol_detect); break;
                    case Criterion::witness: r = witness_check(rho, bip, s.tol_detect).first; break;
                }
                rows.push_back(num(param) + ',' + std::to_string(d) + ',' + r.criterion + ',' + num(r.value) + ',' +
                               to_string(r.verdict) + ',' + num(rho.trace()));
            }
        }
    }
    return rows;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << text;
        if (!out.flush()) throw Error("write to '" + path.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot write '" + path.string() + "'");
    }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entanglement verification by escalating finite truncations", "cvent"};
    app.require_subcommand(1);

    FamilyOptions fam;
    std::string output, state_path, partition_text, growth_text = "inc", expect, file;
    std::vector<std::string> criteria_names;
    double tol_detect = kTolDetect, tol_validate = kHermitianTol;
    std::size_t dstart = 1, dmax = 8, modes = 2;
    bool scan = false;
    std::optional<std::uint64_t> seed_flag;
    Sweep sweep;

    auto* gen = app.add_subcommand("gen", "write a state of a named family to a QSTATE file");
    gen->add_option("--family", fam.family, "state family")->required()->check(CLI::IsMember(family_names()));
    add_family_options(gen, fam);
    gen->add_option("--seed", seed_flag, "RNG seed (default from CVENT_SEED)");
    gen->add_option("-o,--output", output, "output path")->required();

    auto* test = app.add_subcommand("test", "run criteria on a state file at its own dimensions");
    test->add_option("state", state_path, "QSTATE file")->required();
    test->add_option("--criteria", criteria_names, "ppt,realign,witness")->delimiter(',');
    test->add_option("--partition", partition_text, "bipartition, e.g. 0|1,2 (default 0|rest)");
    test->add_option("--tol-detect", tol_detect, "detection tolerance on the signed margin")->capture_default_str();
    test->add_option("--tol-validate", tol_validate, "Hermiticity/positivity tolerance")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "escalate truncation dimension until entanglement is certified");
    auto* fam_opt = verify->add_option("--family", fam.family, "state family")->check(CLI::IsMember(family_names()));
    verify->add_option("--file", file, "QSTATE file (finite source)")->excludes(fam_opt);
    add_family_options(verify, fam);
    verify->add_option("--seed", seed_flag, "RNG seed (default from CVENT_SEED)");
    verify->add_option("--dstart", dstart, "first truncation dimension")->capture_default_str();
    verify->add_option("--dmax", dmax, "largest truncation dimension")->capture_default_str();
    verify->add_option("--growth", growth_text, "inc or double")->check(CLI::IsMember({"inc", "double"}))->capture_default_str();
    verify->add_option("--criteria", criteria_names, "ppt,realign,witness")->delimiter(',');
    verify->add_option("--partition", partition_text, "bipartition, e.g. 0|1,2 (default 0|rest)");
    verify->add_flag("--scan-bipartitions", scan, "scan every bipartition of a multimode state");
    verify->add_option("--expect", expect, "entangled or undecided; exit 3 on mismatch")
        ->check(CLI::IsMember({"entangled", "undecided"}));
    verify->add_option("--tol-detect", tol_detect, "detection tolerance on the signed margin")->capture_default_str();

    auto* sw = app.add_subcommand("sweep", "criteria over a parameter grid, written as CSV");
    sw->add_option("--family", sweep.family, "isotropic or tmsv")->required()->check(CLI::IsMember({"isotropic", "tmsv"}));
    sw->add_option("--start", sweep.start, "first parameter value")->required();
    sw->add_option("--stop", sweep.stop, "last parameter value (inclusive)")->required();
    sw->add_option("--step", sweep.step, "grid step")->required();
    sw->add_option("--dim", sweep.dim, "fixed dimension");
    sw->add_option("--dmin", sweep.dmin, "first dimension of a dimension range");
    sw->add_option("--dmax", sweep.dmax, "last dimension of a dimension range");
    sw->add_option("--criteria", criteria_names, "ppt,realign,witness")->delimiter(',');
    sw->add_option("--tol-detect", sweep.tol_detect, "detection tolerance")->capture_default_str();
    sw->add_option("-o,--output", output, "CSV path")->required();

    auto* bp = app.add_subcommand("bipartitions", "list the bipartitions of M modes");
    bp->add_option("--modes", modes, "number of modes")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    auto echo_command = [&](RunReport& rep) {
        std::ostringstream os;
        for (int i = 1; i < argc; ++i) os << (i > 1 ? " " : "") << argv[i];
        rep.kv("command", os.str());
    };

    try {
        fam.seed = seed_flag ? *seed_flag : default_seed();

        if (gen->parsed()) {
            QState st = generate(fam);
            write_qstate(st, output);
            RunReport rep(out);
            echo_command(rep);
            rep.kv("config", fam.echo());
            rep.kv("seed", std::to_string(fam.seed));
            rep.kv("output", output);
            auto d = as_density(st);
            rep.kv("kind", std::holds_alternative<PureStateVec>(st) ? "pure" : "density");
            rep.kv("dims", dims_str(d.map().dims()));
            rep.kv("trace", d.trace());
            rep.finish();
            return kOk;
        }

        if (test->parsed()) {
            QState st;
            {
                std::ifstream in(state_path);
                if (!in) throw ParseError(0, "cannot open '" + state_path + "'");
                st = parse_qstate(in);
            }
            DensityState rho = as_density(st);
            if (tol_validate != kHermitianTol) rho = validate_density(rho.matrix(), rho.map(), tol_validate);
            if (rho.num_modes() < 2) throw ContractViolation("state has a single mode; nothing to test");
            Bipartition bip = partition_text.empty() ? Bipartition::first_vs_rest(rho.num_modes())
                                                     : Bipartition::parse(partition_text);
            bip.check(rho.num_modes());
            auto crit = parse_criteria(criteria_names.empty() ? std::vector<std::string>{"ppt", "realign", "witness"}
                                                              : criteria_names);
            RunReport rep(out);
            echo_command(rep);
            rep.kv("config", "state=" + state_path + " partition=" + bip.label() + " tol_detect=" + num(tol_detect) +
                                 " tol_validate=" + num(tol_validate));
            rep.kv("dims", dims_str(rho.map().dims()));
            rep.kv("trace", rho.trace());
            for (auto c : crit) {
                CriterionResult r;
                switch (c) {
                    case Criterion::ppt: r = ppt_check(rho, bip, tol_detect); break;
                    case Criterion::realign: r = realignment_check(rho, bip, tol_detect); break;
                    case Criterion::witness: r = witness_check(rho, bip, tol_detect).first; break;
                }
                rep.line("result partition=" + bip.label() + ' ' + result_fields(r));
            }
            rep.finish();
            return kOk;
        }

        if (verify->parsed()) {
            StateProvider provider;
            std::string source_echo;
            if (!file.empty()) {
                provider = FiniteSource{as_density(read_qstate(file))};
                source_echo = "file=" + file;
            } else if (!fam.family.empty()) {
                provider = provider_for(fam);
                source_echo = fam.echo();
            } else {
                throw ContractViolation("verify needs --family or --file");
            }
            EscalationConfig cfg;
            cfg.d_start = dstart;
            cfg.d_max = dmax;
            cfg.growth = growth_text == "double" ? Growth::doubling : Growth::increment;
            if (!criteria_names.empty()) cfg.criteria = parse_criteria(criteria_names);
            cfg.tol_detect = tol_detect;
            if (!partition_text.empty()) cfg.partition = Bipartition::parse(partition_text);
            cfg.check();

            RunReport rep(out);
            echo_command(rep);
            {
                std::ostringstream os;
                os << source_echo << " dstart=" << dstart << " dmax=" << dmax << " growth=" << growth_text
                   << " criteria=";
                for (std::size_t i = 0; i < cfg.criteria.size(); ++i) os << (i ? "," : "") << to_string(cfg.criteria[i]);
                os << " tol_detect=" << num(tol_detect) << " scan=" << (scan ? 1 : 0);
                if (cfg.partition) os << " partition=" << cfg.partition->label();
                rep.kv("config", os.str());
            }
            rep.kv("seed", std::to_string(fam.seed));

            bool entangled = false;
            if (scan) {
                if (cfg.partition) throw ContractViolation("--scan-bipartitions and --partition are exclusive");
                auto res = multipartite_scan(provider, cfg);
                for (const auto& [b, v] : res.verdicts) report_verdict(rep, v, dstart, cfg);
                entangled = res.any_entangled();
            } else {
                auto v = verify_escalating(provider, cfg);
                report_verdict(rep, v, dstart, cfg);
                entangled = v.entangled();
            }
            rep.kv("overall", entangled ? "entangled" : "undecided");
            bool met = expect.empty() || (expect == "entangled") == entangled;
            if (!expect.empty()) rep.kv("expect", expect + (met ? " met" : " not-met"));
            rep.finish();
            return met ? kOk : kExpectationMismatch;
        }

        if (sw->parsed()) {
            sweep.criteria = parse_criteria(criteria_names.empty() ? std::vector<std::string>{"ppt"} : criteria_names);
            auto rows = sweep_rows(sweep);
            std::string csv = std::string(kCsvHeader) + '\n';
            for (const auto& r : rows) csv += r + '\n';
            write_text_atomic(output, csv);
            RunReport rep(out);
            echo_command(rep);
            std::ostringstream os;
            os << "family=" << sweep.family << " start=" << num(sweep.start) << " stop=" << num(sweep.stop)
               << " step=" << num(sweep.step) << " dim=" << sweep.dim << " dmin=" << sweep.dmin << " dmax=" << sweep.dmax
               << " tol_detect=" << num(sweep.tol_detect);
            rep.kv("config", os.str());
            rep.kv("output", output);
            rep.kv("rows", std::to_string(rows.size()));
            rep.finish();
            return kOk;
        }

        if (bp->parsed()) {
            for (const auto& b : bipartitions(modes)) out << b.label() << '\n';
            return kOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace cvent::cli
