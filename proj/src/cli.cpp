#include "mclab/cli.hpp"

#include "mclab/bands.hpp"
#include "mclab/corpus.hpp"
#include "mclab/dyadic.hpp"
#include "mclab/extremals.hpp"
#include "mclab/parallel.hpp"
#include "mclab/towers.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace mclab {

namespace {

using Plain = nlohmann::json;  // std::map objects: sorted keys, stable references

// Reads one config object, mirrors every resolved value (defaults included)
// into the effective config and rejects fields nobody asked for.
class Fields {
public:
    Fields(const Json* src, std::string prefix, Plain* eff) : src_(src), prefix_(std::move(prefix)), eff_(eff) {
        if (src_ && !src_->is_object()) throw ConfigError("config field '" + prefix_ + "' must be an object");
        *eff_ = Plain::object();
    }

    bool has(const std::string& k) const { return src_ && src_->contains(k); }

    template <class T>
    T need(const std::string& k) {
        used_.insert(k);
        if (!has(k)) fail(k, "is required");
        T v;
        try {
            v = src_->at(k).get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(k, "has the wrong type");
        }
        (*eff_)[k] = v;
        return v;
    }

    template <class T>
    T get(const std::string& k, const T& fallback) {
        if (!has(k)) {
            used_.insert(k);
            (*eff_)[k] = fallback;
            return fallback;
        }
        return need<T>(k);
    }

    template <class T>
    std::optional<T> maybe(const std::string& k) {
        if (!has(k)) {
            used_.insert(k);
            return std::nullopt;
        }
        return need<T>(k);
    }

    // Marks a field consumed without recording it.
    const Json* take(const std::string& k) {
        used_.insert(k);
        return has(k) ? &src_->at(k) : nullptr;
    }

    Fields child(const std::string& k) {
        used_.insert(k);
        const Json* sub = has(k) ? &src_->at(k) : nullptr;
        return Fields(sub, name(k), &(*eff_)[k]);
    }

    // Object array under k; the callback sees one Fields per element.
    template <class Fn>
    std::size_t each(const std::string& k, Fn&& fn) {
        used_.insert(k);
        Plain& arr = (*eff_)[k];
        arr = Plain::array();
        if (!has(k)) return 0;
        const Json& src = src_->at(k);
        if (!src.is_array()) fail(k, "must be an array");
        for (std::size_t i = 0; i < src.size(); ++i) arr.push_back(Plain::object());
        for (std::size_t i = 0; i < src.size(); ++i) {
            Fields f(&src[i], name(k) + "[" + std::to_string(i) + "]", &arr[i]);
            fn(f, i);
            f.finish();
        }
        return src.size();
    }

    void check(bool ok, const std::string& k, const std::string& msg) const {
        if (!ok) fail(k, msg);
    }

    void finish() const {
        if (!src_) return;
        for (const auto& item : src_->items())
            if (!used_.count(item.key())) fail(item.key(), "is not a recognized field");
    }

    [[noreturn]] void fail(const std::string& k, const std::string& msg) const {
        throw ConfigError("config field '" + name(k) + "' " + msg);
    }

    std::string name(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }

private:
    const Json* src_;
    std::string prefix_;
    Plain* eff_;
    std::set<std::string> used_;
};

// Shared top-level fields.
struct Common {
    std::uint64_t seed = 1;
    std::size_t budget = 0;
    QuadratureSpec quad;
};

Common read_common(Fields& f, const RunOptions& options) {
    Common c;
    const Json* s = f.take("seed");
    if (options.seed) {
        c.seed = *options.seed;
    } else if (s) {
        f.check(s->is_number_unsigned() || (s->is_number_integer() && s->get<long long>() >= 0), "seed",
                "must be a nonnegative integer");
        c.seed = s->get<std::uint64_t>();
    }
    const auto budget = f.get<long long>("cell_budget", static_cast<long long>(default_cell_budget()));
    f.check(budget > 0, "cell_budget", "must be positive");
    c.budget = static_cast<std::size_t>(budget);
    auto q = f.child("quadrature");
    c.quad.t_step = q.get<double>("t_step", 0.0);
    q.check(c.quad.t_step >= 0 && std::isfinite(c.quad.t_step), "t_step", "must be >= 0 (0 = automatic)");
    c.quad.R = q.get<double>("R", 1.0);
    q.check(c.quad.R > 0 && std::isfinite(c.quad.R), "R", "must be positive");
    q.finish();
    c.quad.jobs = options.jobs;
    return c;
}

int read_n(Fields& f, int lo, int hi, const std::optional<int>& fallback = std::nullopt) {
    const int n = fallback ? f.get<int>("n", *fallback) : f.need<int>("n");
    f.check(n >= lo && n <= hi, "n", "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return n;
}

Json envelope(const std::string& command, const Plain& effective, const Common& c) {
    Json j;
    j["command"] = command;
    j["config_hash"] = config_hash(Json::parse(effective.dump()), c.seed);
    j["seed"] = c.seed;
    j["config"] = Json::parse(effective.dump());
    return j;
}

std::filesystem::path resolve(const RunOptions& o, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : o.config_dir / path;
}

LatticeSet load_set(const RunOptions& o, const std::string& p, int n, std::size_t budget, const Fields& f,
                    const std::string& key) {
    const auto path = resolve(o, p);
    const Json j = read_json(path);
    LatticeSet s{n, 1.0};
    try {
        s = lattice_from_json(j, budget);
    } catch (const PreconditionError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    f.check(s.dimension() == n, key, "points to a set of dimension " + std::to_string(s.dimension()));
    f.check(!s.empty(), key, "points to an empty set");
    return s;
}

void finish_report(CommandResult& r, const RunOptions& o, const std::string& stem) {
    r.report["status"] = r.passed ? "pass" : "fail";
    const auto path = o.out / (stem + ".json");
    write_json(path, r.report);
    r.files.push_back(path);
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

}  // namespace

// ---------------------------------------------------------------- norm-estimate

CommandResult cmd_norm_estimate(const Json& config, const RunOptions& options) {
    Plain eff;
    Fields f(&config, "", &eff);
    const Common common = read_common(f, options);
    const int n = read_n(f, 2, 4);
    const auto max_ratio = f.maybe<double>("max_ratio");
    if (max_ratio) f.check(*max_ratio > 0, "max_ratio", "must be positive");

    auto corpus = f.child("corpus");
    auto random = corpus.child("random");
    const int count = random.get<int>("count", 0);
    random.check(count >= 0 && count <= 100000, "count", "must lie in [0, 100000]");
    CorpusOptions copt;
    copt.budget = common.budget;
    const auto kinds = random.get<std::vector<std::string>>("kinds", {"quasi", "boxes", "tube_box"});
    random.check(!kinds.empty(), "kinds", "must not be empty");
    copt.kinds.clear();
    for (const auto& k : kinds) {
        try {
            copt.kinds.push_back(pair_kind_from_string(k));
        } catch (const PreconditionError& e) {
            random.fail("kinds", e.what());
        }
    }
    copt.min_side_exp = random.get<int>("min_side_exp", -4);
    random.check(copt.min_side_exp >= -8 && copt.min_side_exp <= -1, "min_side_exp", "must lie in [-8, -1]");
    random.finish();

    struct QuasiSpec {
        double eps, r, divisor;
        Point center;
    };
    std::vector<QuasiSpec> quasi;
    corpus.each("quasi", [&](Fields& e, std::size_t) {
        QuasiSpec q;
        q.eps = e.need<double>("eps");
        e.check(q.eps > 0 && q.eps <= 1, "eps", "must lie in (0, 1]");
        q.r = e.get<double>("r", 1.0);
        e.check(q.r > 0 && q.r <= 1, "r", "must lie in (0, 1]");
        q.divisor = e.get<double>("divisor", 4.0);
        e.check(q.divisor >= 4, "divisor", "must be at least 4");
        q.center = e.get<std::vector<double>>("center", Point(static_cast<std::size_t>(n), 0.0));
        e.check(q.center.size() == static_cast<std::size_t>(n), "center", "must have n coordinates");
        quasi.push_back(q);
    });
    std::vector<std::pair<std::string, std::string>> files;
    corpus.each("files", [&](Fields& e, std::size_t) {
        files.emplace_back(e.need<std::string>("E"), e.need<std::string>("F"));
    });
    corpus.finish();
    f.finish();
    if (count == 0 && quasi.empty() && files.empty()) throw ConfigError("corpus empty");

    std::vector<SetPair> items;
    for (const auto& q : quasi) items.push_back(quasi_pair(n, q.eps, q.r, q.center, q.divisor, common.budget));
    for (std::size_t i = 0; i < files.size(); ++i) {
        SetPair p;
        p.kind = PairKind::quasi;
        p.label = "file " + files[i].first + " " + files[i].second;
        p.E = load_set(options, files[i].first, n, common.budget, corpus, "files[" + std::to_string(i) + "].E");
        p.F = load_set(options, files[i].second, n, common.budget, corpus, "files[" + std::to_string(i) + "].F");
        items.push_back(std::move(p));
    }
    auto rnd = random_corpus(n, count, common.seed, copt, options.jobs);
    for (auto& p : rnd) items.push_back(std::move(p));

    std::vector<double> pairings(items.size()), ratios(items.size());
    QuadratureSpec q1 = common.quad;
    q1.jobs = 1;
    parallel_chunks(items.size(), options.jobs, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) {
            pairings[i] = pairing(items[i].E, items[i].F, q1);
            ratios[i] = restricted_weak_ratio(items[i].E, items[i].F, q1);
        }
    });

    CsvWriter csv({"index", "source", "kind", "label", "measure_E", "measure_F", "pairing", "ratio"});
    std::map<std::string, std::vector<double>> by_kind;
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string source = i < quasi.size() ? "quasi" : i < quasi.size() + files.size() ? "file" : "random";
        csv.row({static_cast<long long>(i), source, to_string(items[i].kind), items[i].label, items[i].E.measure(),
                 items[i].F.measure(), pairings[i], ratios[i]});
        by_kind[to_string(items[i].kind)].push_back(ratios[i]);
        if (ratios[i] > ratios[argmax]) argmax = i;
    }
    CommandResult r;
    r.report = envelope("norm-estimate", eff, common);
    const double hi = ratios[argmax];
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    Json kinds_json = Json::object();
    for (const auto& [k, v] : by_kind)
        kinds_json[k] = Json{{"count", v.size()},
                             {"min_ratio", *std::min_element(v.begin(), v.end())},
                             {"max_ratio", *std::max_element(v.begin(), v.end())}};
    r.report["calibrated_constants"] = Json{{"C", hi}};
    r.report["result"] = Json{{"n", n},
                              {"count", items.size()},
                              {"max_ratio", hi},
                              {"min_ratio", lo},
                              {"argmax", argmax},
                              {"argmax_label", items[argmax].label},
                              {"by_kind", kinds_json}};
    if (max_ratio) {
        r.passed = hi <= *max_ratio;
        r.report["result"]["max_ratio_allowed"] = *max_ratio;
    }
    const auto csv_path = options.out / "norm_estimate.csv";
    write_text(csv_path, csv.str());
    r.files.push_back(csv_path);
    finish_report(r, options, "norm_estimate");
    r.summary.push_back("pairs " + std::to_string(items.size()) + ", ratio in [" + fmt(lo) + ", " + fmt(hi) + "]");
    return r;
}

// ---------------------------------------------------------------- sharpness-scan

CommandResult cmd_sharpness_scan(const Json& config, const RunOptions& options) {
    Plain eff;
    Fields f(&config, "", &eff);
    const Common common = read_common(f, options);
    FamilyKind kind;
    try {
        kind = family_kind_from_string(f.need<std::string>("family"));
    } catch (const ConfigError&) {
        throw;
    } catch (const PreconditionError& e) {
        f.fail("family", e.what());
    }
    const int n = read_n(f, 2, 4);
    double u = 0, v = 0;
    if (kind == FamilyKind::u_le_v) {
        u = f.need<double>("u");
        v = f.need<double>("v");
    } else if (kind == FamilyKind::u_le_qn) {
        u = f.need<double>("u");
        v = f.get<double>("v", u);
    } else {
        v = f.need<double>("v");
        u = f.get<double>("u", v);
    }
    f.check(u >= 1 && std::isfinite(u), "u", "must be finite and >= 1");
    f.check(v > 1 && std::isfinite(v), "v", "must be finite and > 1");
    const auto M = f.get<std::vector<int>>("M", {1, 2, 3, 4});
    for (int m : M) f.check(m >= 1 && m <= 64, "M", "entries must lie in [1, 64]");
    f.check(std::set<int>(M.begin(), M.end()).size() >= 3, "M", "needs at least three distinct values");
    NormForm form;
    try {
        form = norm_form_from_string(f.get<std::string>("norm_form", "dyadic"));
    } catch (const PreconditionError& e) {
        f.fail("norm_form", e.what());
    }
    DeltaRule rule;
    rule.divisor = f.get<double>("delta_divisor", 8.0);
    f.check(rule.divisor >= 4, "delta_divisor", "must be at least 4");
    const double eps_scale = f.get<double>("eps_scale", 0.125);
    f.check(eps_scale > 0 && eps_scale <= 1, "eps_scale", "must lie in (0, 1]");
    const auto tolerance = f.maybe<double>("tolerance");
    if (tolerance) f.check(*tolerance > 0, "tolerance", "must be positive");
    f.finish();

    const auto rep = fit_scaling(kind, n, u, v, M, common.quad, rule, common.budget, eps_scale, form);

    CsvWriter csv({"M", "ratio", "pairing", "left_norm", "right_norm"});
    for (std::size_t i = 0; i < rep.M_values.size(); ++i)
        csv.row({static_cast<long long>(rep.M_values[i]), rep.ratios[i], rep.pairings[i], rep.left_norms[i],
                 rep.right_norms[i]});
    CommandResult r;
    r.report = envelope("sharpness-scan", eff, common);
    r.report["result"] = to_json(rep);
    if (tolerance) {
        r.passed = std::abs(rep.deviation()) <= *tolerance;
        r.report["result"]["tolerance"] = *tolerance;
    }
    const auto csv_path = options.out / "sharpness_scan.csv";
    write_text(csv_path, csv.str());
    r.files.push_back(csv_path);
    finish_report(r, options, "sharpness_scan");
    r.summary.push_back(to_string(kind) + " n=" + std::to_string(n) + ": slope " + fmt(rep.fitted_slope) +
                        ", predicted " + fmt(rep.predicted_slope));
    return r;
}

// ---------------------------------------------------------------- bands-demo

namespace {

std::string bands_text(const std::vector<std::vector<int>>& bands) {
    std::string s;
    for (const auto& b : bands) {
        if (!s.empty()) s += ' ';
        s += '{';
        for (std::size_t i = 0; i < b.size(); ++i) s += (i ? "," : "") + std::to_string(b[i]);
        s += '}';
    }
    return s;
}

std::string roles_text(const BandPartition& p) {
    std::string s;
    for (auto role : p.roles()) s += (s.empty() ? "" : " ") + to_string(role);
    return s;
}

}  // namespace

CommandResult cmd_bands_demo(const Json& config, const RunOptions& options) {
    Plain eff;
    Fields f(&config, "", &eff);
    const Common common = read_common(f, options);
    const int n = read_n(f, 2, 8);
    const int ensembles = f.get<int>("ensembles", 1);
    f.check(ensembles >= 1 && ensembles <= 100000, "ensembles", "must lie in [1, 100000]");

    EnsembleModel model;
    model.n = n;
    std::optional<Ensemble> fixed;
    if (f.has("configurations")) {
        fixed = f.need<Ensemble>("configurations");
        f.check(!fixed->empty(), "configurations", "must not be empty");
        for (const auto& t : *fixed) {
            f.check(t.size() == static_cast<std::size_t>(2 * n - 1), "configurations",
                    "entries must have 2n-1 coordinates");
            for (double x : t) f.check(x >= -1 && x <= 1, "configurations", "coordinates must lie in [-1, 1]");
        }
        f.check(ensembles == 1, "ensembles", "must be 1 with explicit configurations");
    } else {
        f.take("configurations");
    }
    auto m = f.child("model");
    model.alpha1 = m.get<double>("alpha1", model.alpha1);
    model.beta1 = m.get<double>("beta1", model.beta1);
    model.beta2 = m.get<double>("beta2", model.beta2);
    model.cluster_prob = m.get<double>("cluster_prob", model.cluster_prob);
    model.count = m.get<int>("count", model.count);
    m.check(model.alpha1 > 0, "alpha1", "must be positive");
    m.check(model.beta1 > 0, "beta1", "must be positive");
    m.check(model.beta2 > 0, "beta2", "must be positive");
    m.check(model.cluster_prob >= 0 && model.cluster_prob <= 1, "cluster_prob", "must lie in [0, 1]");
    m.check(model.count >= 1 && model.count <= 1000000, "count", "must lie in [1, 1000000]");
    m.finish();

    auto p = f.child("params");
    BandParams params = BandParams::defaults(n, model.alpha1, model.beta1, model.beta2);
    params.gamma2 = p.get<double>("gamma2", params.gamma2);
    params.c_n = p.get<double>("c_n", params.c_n);
    params.eps_lemma = p.get<double>("eps_lemma", params.eps_lemma);
    params.delta = p.get<double>("delta", params.delta);
    params.delta_prime = p.get<double>("delta_prime", params.delta_prime);
    params.rho = p.get<double>("rho", params.rho);
    params.rho_prime = p.get<double>("rho_prime", params.rho_prime);
    p.finish();
    try {
        params.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("config field 'params' is invalid: ") + e.what());
    }
    SamplingPolicy policy;
    policy.tolerance = f.get<double>("tolerance", policy.tolerance);
    f.check(policy.tolerance >= 0 && policy.tolerance < 1, "tolerance", "must lie in [0, 1)");
    f.finish();

    std::vector<PipelineResult> results(static_cast<std::size_t>(ensembles));
    parallel_chunks(results.size(), options.jobs, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) {
            std::seed_seq seq{static_cast<std::uint32_t>(common.seed), static_cast<std::uint32_t>(common.seed >> 32),
                              static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);
            const Ensemble ens = fixed ? *fixed : sample_band_ensemble(model, params, rng);
            results[i] = run_band_pipeline(ens, params, n, policy);
        }
    });

    CsvWriter csv({"ensemble", "stage", "bands", "designations", "free", "quasi_free", "bound", "M1", "M2", "N", "R2",
                   "k", "iterations", "survivor_fraction"});
    Json list = Json::array();
    int bad = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& res = results[i];
        const auto add = [&](const std::string& stage, const BandPartition& part, int iterations) {
            const auto c = part.counts();
            csv.row({static_cast<long long>(i), stage, bands_text(part.bands), roles_text(part), static_cast<long long>(c.free),
                     static_cast<long long>(c.quasi_free), static_cast<long long>(c.bound),
                     static_cast<long long>(c.M1), static_cast<long long>(c.M2), static_cast<long long>(c.N),
                     static_cast<long long>(c.R2), static_cast<long long>(c.k), static_cast<long long>(iterations),
                     res.survivor_fraction});
        };
        add("first", res.first.partition, res.first.iterations);
        add("second", res.second.partition, res.second.iterations);
        add("final", res.dropped.partition, 0);

        Json item{{"ensemble", i}, {"pipeline", to_json(res)}};
        const auto& fin = res.dropped.partition;
        const auto roles = fin.roles();
        const auto cand = candidate_from_counts(n, roles.back(), fin.counts());
        if (cand) {
            const auto chk = check_candidate(n, *cand);
            if (!chk.ok()) ++bad;
            item["candidate"] = Json{{"exponents", to_json(*cand)}, {"check", to_json(chk)}};
        } else {
            item["candidate"] = nullptr;
        }
        list.push_back(std::move(item));
    }
    CommandResult r;
    r.passed = bad == 0;
    r.report = envelope("bands-demo", eff, common);
    r.report["parameters"] = to_json(params);
    r.report["result"] = Json{{"ensembles", std::move(list)}, {"invalid_candidates", bad}};
    const auto csv_path = options.out / "bands_demo.csv";
    write_text(csv_path, csv.str());
    r.files.push_back(csv_path);
    finish_report(r, options, "bands_demo");
    const auto& last = results.back().dropped.partition;
    r.summary.push_back("ensembles " + std::to_string(ensembles) + ", last partition " + bands_text(last.bands) +
                        " (" + roles_text(last) + ")");
    return r;
}

// ---------------------------------------------------------------- verify-multilinear

namespace {

struct ExponentSuite {
    int candidates = 0;
    int candidate_failures = 0;
    int instances = 0;
    int instance_failures = 0;
    int violations = 0;
    int violations_missed = 0;
};

ExponentSuite run_exponent_suite(int n_max) {
    ExponentSuite s;
    for (int n = 2; n <= n_max; ++n) {
        for (const auto& c : mlF_candidates(n)) {
            ++s.candidates;
            if (!check_candidate(n, c).ok()) ++s.candidate_failures;
            auto two = side_two_instance(n, c);
            ++s.instances;
            if (!check_hypothesis_exponents(two).ok) ++s.instance_failures;
            // Breaking the exponent sum must be caught.
            two.e[0] += Rational(1, 2);
            ++s.violations;
            if (check_hypothesis_exponents(two).ok) ++s.violations_missed;
        }
        ++s.instances;
        if (!check_hypothesis_exponents(side_one_from_mlE(n)).ok) ++s.instance_failures;
    }
    // Strict inequality sitting exactly on its boundary.
    const HypothesisExponents edge{HypothesisSide::one, {Rational(1, 2), Rational(3, 2), 1, 0}, Rational(3, 2), 3};
    ++s.violations;
    if (check_hypothesis_exponents(edge).ok) ++s.violations_missed;
    return s;
}

// Every level lands in exactly one class or in the zero list, with class
// members spaced by at least the class spacing.
bool exact_partition(const Classification& cls, const StepFunction& f) {
    std::multiset<int> seen(cls.zero.begin(), cls.zero.end());
    for (const auto& [key, js] : cls.classes) {
        const int L = Classification::spacing(cls.A, key.eps_exp);
        if (key.i < 1 || key.i > L) return false;
        for (std::size_t a = 0; a < js.size(); ++a) {
            seen.insert(js[a]);
            for (std::size_t b = a + 1; b < js.size(); ++b)
                if (std::abs(js[a] - js[b]) < L) return false;
        }
    }
    if (seen.size() != f.levels().size()) return false;
    for (const auto& lv : f.levels())
        if (seen.count(lv.j) != 1) return false;
    return true;
}

}  // namespace

CommandResult cmd_verify_multilinear(const Json& config, const RunOptions& options) {
    Plain eff;
    Fields f(&config, "", &eff);
    const Common common = read_common(f, options);
    const int n = read_n(f, 2, 4);
    const std::vector<std::string> all{"mlE", "mlF", "exponents", "dyadic", "towers"};
    const auto checks = f.get<std::vector<std::string>>("checks", all);
    f.check(!checks.empty(), "checks", "must not be empty");
    for (const auto& c : checks)
        f.check(std::find(all.begin(), all.end(), c) != all.end(), "checks", "has unknown entry '" + c + "'");
    const auto wants = [&](const std::string& c) { return std::find(checks.begin(), checks.end(), c) != checks.end(); };

    auto pair = f.child("pair");
    const double eps = pair.get<double>("eps", 0.25);
    pair.check(eps > 0 && eps <= 1, "eps", "must lie in (0, 1]");
    const double rr = pair.get<double>("r", 1.0);
    pair.check(rr > 0 && rr <= 1, "r", "must lie in (0, 1]");
    pair.finish();

    auto inputs = f.child("inputs");
    std::map<std::string, std::string> input_paths;
    for (const char* k : {"E1", "E2", "F", "E", "F1", "F2"})
        if (auto p = inputs.maybe<std::string>(k)) input_paths[k] = *p;
    inputs.finish();

    const auto read_ml = [](Fields& g, bool halve_default) {
        MultilinearOptions o;
        o.c = g.get<double>("c", 0.0);
        g.check(o.c >= 0, "c", "must be >= 0 (0 = default)");
        o.always_halve = g.get<bool>("always_halve", halve_default);
        if (auto rho = g.maybe<double>("rho")) {
            g.check(*rho > 0, "rho", "must be positive");
            o.rho = rho;
        }
        g.finish();
        return o;
    };
    auto mlE_f = f.child("mlE");
    const auto mlE_opt = read_ml(mlE_f, false);
    auto mlF_f = f.child("mlF");
    const auto mlF_opt = read_ml(mlF_f, true);

    auto ex = f.child("exponents");
    const int n_max = ex.get<int>("n_max", 8);
    ex.check(n_max >= 2 && n_max <= 12, "n_max", "must lie in [2, 12]");
    ex.finish();

    auto dy = f.child("dyadic");
    const int dn = read_n(dy, 2, 3, 2);
    FamilyKind dkind;
    try {
        dkind = family_kind_from_string(dy.get<std::string>("family", "u_le_qn"));
    } catch (const PreconditionError& e) {
        dy.fail("family", e.what());
    }
    dy.check(dkind != FamilyKind::v_ge_pn, "family", "must be u_le_qn or u_le_v");
    const auto dM = dy.get<std::vector<int>>("M", {2, 3});
    dy.check(!dM.empty(), "M", "must not be empty");
    for (int m : dM) dy.check(m >= 1 && m <= 16, "M", "entries must lie in [1, 16]");
    const ExponentProfile dprof(dn);
    const double du = dy.get<double>("u", 2.0);
    dy.check(du >= 1 && du < dprof.q_value(), "u", "must satisfy 1 <= u < q_n");
    const double dv = dy.get<double>("v", 2.0);
    dy.check(dv > 1, "v", "must be > 1");
    const double C_audit = dy.get<double>("C_audit", 4.0);
    dy.check(C_audit > 0, "C_audit", "must be positive");
    const double A = dy.get<double>("A", default_separation_constant(dprof));
    dy.check(A > 0, "A", "must be positive");
    const double ratio_bound = dy.get<double>("two_bound_max", 8.0);
    dy.check(ratio_bound > 0, "two_bound_max", "must be positive");
    dy.finish();

    auto tw = f.child("towers");
    const int seeds = tw.get<int>("seeds", 5);
    tw.check(seeds >= 1 && seeds <= 64, "seeds", "must lie in [1, 64]");
    const int starts = tw.get<int>("starts", 16);
    tw.check(starts >= 1, "starts", "must be positive");
    const int paths = tw.get<int>("paths", 60);
    tw.check(paths >= 1, "paths", "must be positive");
    const double spread = tw.get<double>("spread", 0.5);
    tw.check(spread > 0, "spread", "must be positive");
    TowerOptions topt;
    topt.samples_per_level = tw.get<int>("samples_per_level", topt.samples_per_level);
    tw.check(topt.samples_per_level >= 1, "samples_per_level", "must be positive");
    topt.jobs = options.jobs;
    tw.finish();
    f.finish();

    // Inputs: files when given, otherwise the quasi-extremal pair.
    const SetPair qp = quasi_pair(n, eps, rr, Point(static_cast<std::size_t>(n), 0.0), 4.0, common.budget);
    const auto set = [&](const std::string& key, const LatticeSet& fallback) {
        const auto it = input_paths.find(key);
        if (it == input_paths.end()) return fallback;
        return load_set(options, it->second, n, common.budget, f, "inputs." + key);
    };

    CommandResult r;
    r.report = envelope("verify-multilinear", eff, common);
    Json results = Json::object();
    Json constants = Json::object();
    CsvWriter csv({"check", "status", "value", "detail"});
    const auto record = [&](const std::string& name, CheckStatus st, double value, const std::string& detail) {
        if (st == CheckStatus::fail) r.passed = false;
        csv.row({name, to_string(st), value, detail});
        r.summary.push_back(name + ": " + to_string(st) + " (" + detail + ")");
    };

    if (wants("mlE")) {
        const auto E1 = set("E1", qp.E), E2 = set("E2", qp.E), F = set("F", qp.F);
        const auto rep = verify_mlE(E1, E2, F, common.quad, mlE_opt);
        results["mlE"] = to_json(rep);
        constants["mlE_c"] = rep.c;
        record("mlE", rep.status, rep.ratio, "|E2|/bound = " + fmt(rep.ratio) + ", c = " + fmt(rep.c));
    }
    if (wants("mlF")) {
        const auto E = set("E", qp.E), F1 = set("F1", qp.F), F2 = set("F2", qp.F);
        const auto rep = verify_mlF(E, F1, F2, common.quad, mlF_opt);
        results["mlF"] = to_json(rep);
        constants["mlF_c"] = rep.c;
        record("mlF", rep.status, rep.best_ratio,
               "best |F2|/bound = " + fmt(rep.best_ratio) + " over " + std::to_string(rep.candidates.size()) +
                   " candidates");
    }
    if (wants("exponents")) {
        const auto s = run_exponent_suite(n_max);
        const bool ok = s.candidate_failures == 0 && s.instance_failures == 0 && s.violations_missed == 0;
        results["exponents"] = Json{{"n_max", n_max},
                                    {"candidates", s.candidates},
                                    {"candidate_failures", s.candidate_failures},
                                    {"instances", s.instances},
                                    {"instance_failures", s.instance_failures},
                                    {"violations", s.violations},
                                    {"violations_missed", s.violations_missed}};
        record("exponents", ok ? CheckStatus::pass : CheckStatus::fail, static_cast<double>(s.candidates),
               std::to_string(s.candidates) + " candidates, " + std::to_string(s.violations) + " planted violations");
    }
    if (wants("dyadic")) {
        Json fams = Json::array();
        bool ok = true;
        double worst_audit = 0, worst_two = 0;
        for (int M : dM) {
            StepFunction fn;
            SetPieces F;
            if (dkind == FamilyKind::u_le_qn) {
                std::tie(fn, F) = build_u_le_qn(dn, M);
            } else {
                auto [fv, gv] = build_u_le_v(dn, M, du, dv);
                fn = std::move(fv);
                for (const auto& lv : gv.levels()) F.push_back(lv.set);
            }
            const auto cls = classify(fn, F, dprof, A, common.quad);
            const bool part = exact_partition(cls, fn);
            const auto G = half_level_sets(fn, F, common.quad);
            bool half = true;
            for (const auto& g : G) half = half && g.kept >= 0.5 * g.full * (1 - 1e-12);
            const auto audit = overlap_audit(G, pieces_measure(F), C_audit);
            Json twos = Json::array();
            bool two_ok = true;
            for (const auto& [key, js] : cls.classes) {
                const auto t = two_bound_check(key, cls, fn, dprof, du);
                two_ok = two_ok && std::isfinite(t.ratio_min) && t.ratio_min <= ratio_bound;
                worst_two = std::max(worst_two, t.ratio_min);
                twos.push_back(to_json(t));
            }
            worst_audit = std::max(worst_audit, audit.ratio);
            ok = ok && part && half && audit.pass && two_ok;
            fams.push_back(Json{{"M", M},
                                {"partition_exact", part},
                                {"half_level_ok", half},
                                {"classification", to_json(cls)},
                                {"overlap", to_json(audit)},
                                {"two_bound", std::move(twos)}});
        }
        results["dyadic"] = Json{{"family", to_string(dkind)}, {"n", dn}, {"A", A}, {"members", std::move(fams)}};
        constants["dyadic_A"] = A;
        record("dyadic", ok ? CheckStatus::pass : CheckStatus::fail, worst_audit,
               "overlap sum/|F| <= " + fmt(worst_audit) + ", two-bound ratio <= " + fmt(worst_two));
    }
    if (wants("towers")) {
        const auto E = set("E1", qp.E), F = set("F", qp.F);
        const auto base = verify_mlE(E, E, F, common.quad, mlE_opt);
        Json runs = Json::array();
        std::vector<double> cs;
        std::string failure;
        if (base.status == CheckStatus::inconclusive) failure = "interaction statistics degenerate: " + base.note;
        for (int i = 0; i < seeds && failure.empty(); ++i) {
            std::mt19937_64 rng(common.seed + static_cast<std::uint64_t>(i));
            try {
                const TowerInputs in{{E, E}, {F}, {base.first, base.second}};
                const auto tower = grow_tower(in, 2 * n, topt, rng);
                const auto chain = jacobian_chain(tower, starts, paths, rng);
                cs.push_back(chain.constant);
                runs.push_back(Json{{"seed", common.seed + static_cast<std::uint64_t>(i)},
                                    {"attempts", tower.attempts},
                                    {"chain", to_json(chain)}});
            } catch (const TowerConstructionError& e) {
                failure = "tower failed at level " + std::to_string(e.failed_level()) + ": " + e.what();
            }
        }
        double median = 0, worst = 0;
        if (!cs.empty()) {
            auto sorted = cs;
            std::sort(sorted.begin(), sorted.end());
            median = sorted[sorted.size() / 2];
            for (double c : cs) worst = std::max(worst, std::abs(c - median) / median);
        }
        const bool ok = failure.empty() && median > 0 && worst <= spread;
        results["towers"] = Json{{"runs", std::move(runs)},
                                 {"median_constant", median},
                                 {"max_relative_spread", worst},
                                 {"allowed_spread", spread},
                                 {"failure", failure}};
        constants["jacobian_chain_c"] = median;
        record("towers", ok ? CheckStatus::pass : CheckStatus::fail, median,
               failure.empty() ? "chain constant " + fmt(median) + ", spread " + fmt(worst) : failure);
    }

    r.report["calibrated_constants"] = constants;
    r.report["result"] = results;
    const auto csv_path = options.out / "verify_multilinear.csv";
    write_text(csv_path, csv.str());
    r.files.push_back(csv_path);
    finish_report(r, options, "verify_multilinear");
    return r;
}

// ---------------------------------------------------------------- entry point

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical experiments for the moment-curve averaging operator", "mclab"};
    app.require_subcommand(1);
    std::string config_path;
    long long seed = -1;
    int jobs = 1;
    std::string out_dir = ".";
    const std::vector<std::pair<std::string, std::string>> commands{
        {"norm-estimate", "restricted weak-type ratios over a set-pair corpus"},
        {"sharpness-scan", "growth exponent of a counterexample family"},
        {"bands-demo", "band partition pipeline on synthetic ensembles"},
        {"verify-multilinear", "multilinear lower bounds, exponent identities and dyadic audits"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed, "overrides the config seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory");
    }

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const std::filesystem::path cfg(config_path);
        const Json config = read_json(cfg);
        if (!config.is_object()) throw ConfigError("config must be a JSON object");
        RunOptions o;
        o.config_dir = cfg.has_parent_path() ? cfg.parent_path() : std::filesystem::path(".");
        if (seed >= 0) o.seed = static_cast<std::uint64_t>(seed);
        o.jobs = jobs;
        o.out = out_dir;

        CommandResult r;
        if (command == "norm-estimate") r = cmd_norm_estimate(config, o);
        else if (command == "sharpness-scan") r = cmd_sharpness_scan(config, o);
        else if (command == "bands-demo") r = cmd_bands_demo(config, o);
        else r = cmd_verify_multilinear(config, o);

        for (const auto& line : r.summary) out << command << ": " << line << "\n";
        for (const auto& p : r.files) out << "wrote " << p.string() << "\n";
        out << command << ": " << (r.passed ? "pass" : "FAIL") << "\n";
        return r.passed ? exit_ok : exit_check_failed;
    } catch (const IoError& e) {
        err << "mclab " << command << ": I/O error: " << e.what() << "\n";
        return exit_io;
    } catch (const PreconditionError& e) {
        err << "mclab " << command << ": " << e.what() << "\n";
        return exit_usage;
    } catch (const TowerConstructionError& e) {
        err << "mclab " << command << ": tower construction failed at level " << e.failed_level() << ": " << e.what()
            << "\n";
        return exit_other;
    } catch (const std::exception& e) {
        err << "mclab " << command << ": " << e.what() << "\n";
        return exit_other;
    }
}

}  // namespace mclab
