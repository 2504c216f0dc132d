#include "mclab/report.hpp"

#include "mclab/error.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mclab {

Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            const long long v = std::stoll(text, &used);
            require(used == text.size(), "");
            return Rational(v);
        }
        const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
        const long long num = std::stoll(a, &used);
        require(used == a.size(), "");
        const long long den = std::stoll(b, &used);
        require(used == b.size() && den != 0, "");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw PreconditionError("not a rational number: '" + text + "'");
    }
}

Json lattice_to_json(const LatticeSet& s) {
    Json cells = Json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = s.cell(i);
        cells.push_back(std::vector<CellIndex>(c.begin(), c.end()));
    }
    return Json{{"n", s.dimension()}, {"delta", s.delta()}, {"cells", std::move(cells)}};
}

LatticeSet lattice_from_json(const Json& j, std::size_t budget) {
    require(j.is_object(), "lattice set: expected an object");
    require(j.contains("n") && j.contains("delta") && j.contains("cells"), "lattice set: needs n, delta and cells");
    const int n = j.at("n").get<int>();
    const double delta = j.at("delta").get<double>();
    require(n >= 1, "lattice set: n must be positive");
    require(delta > 0 && std::isfinite(delta), "lattice set: delta must be positive");
    const auto& cells = j.at("cells");
    require(cells.is_array(), "lattice set: cells must be an array");
    require(cells.size() <= budget, "lattice set: " + std::to_string(cells.size()) + " cells exceed the budget");
    std::vector<CellIndex> flat;
    flat.reserve(cells.size() * static_cast<std::size_t>(n));
    for (const auto& c : cells) {
        require(c.is_array() && c.size() == static_cast<std::size_t>(n), "lattice set: cell of wrong length");
        for (const auto& v : c) flat.push_back(v.get<CellIndex>());
    }
    return LatticeSet::from_cells(n, delta, std::move(flat));
}

Json step_to_json(const StepFunction& f) {
    Json levels = Json::array();
    for (const auto& lv : f.levels()) levels.push_back(Json{{"j", lv.j}, {"set", lattice_to_json(lv.set)}});
    return Json{{"levels", std::move(levels)}};
}

StepFunction step_from_json(const Json& j, std::size_t budget) {
    require(j.is_object() && j.contains("levels") && j.at("levels").is_array(), "step function: needs a levels array");
    std::vector<StepLevel> levels;
    for (const auto& lv : j.at("levels")) {
        require(lv.contains("j") && lv.contains("set"), "step function: each level needs j and set");
        levels.push_back({lv.at("j").get<int>(), lattice_from_json(lv.at("set"), budget)});
    }
    return StepFunction(std::move(levels));
}

std::string to_string(IndexRole role) {
    switch (role) {
        case IndexRole::dropped: return "dropped";
        case IndexRole::free: return "free";
        case IndexRole::quasi_free: return "quasi_free";
        case IndexRole::bound: return "bound";
    }
    return "unknown";
}

Json to_json(const BandParams& p) {
    return Json{{"c_n", p.c_n},       {"eps_lemma", p.eps_lemma}, {"delta", p.delta},
                {"delta_prime", p.delta_prime}, {"rho", p.rho}, {"rho_prime", p.rho_prime},
                {"alpha1", p.alpha1}, {"beta1", p.beta1},         {"gamma2", p.gamma2}};
}

Json to_json(const BandCounts& c) {
    return Json{{"free", c.free}, {"quasi_free", c.quasi_free}, {"bound", c.bound}, {"M1", c.M1},
                {"M2", c.M2},     {"N", c.N},                   {"R2", c.R2},       {"k", c.k}};
}

Json to_json(const BandPartition& p) {
    Json roles = Json::array();
    for (auto r : p.roles()) roles.push_back(to_string(r));
    return Json{{"m", p.m},
                {"bands", p.bands},
                {"designations", std::move(roles)},
                {"anchors", p.anchors()},
                {"last_band", p.last_band},
                {"dropped_prefix", p.dropped_prefix},
                {"counts", to_json(p.counts())}};
}

namespace {

Json refine_json(const RefineResult& r) {
    return Json{{"partition", to_json(r.partition)},
                {"parameters", to_json(r.params)},
                {"iterations", r.iterations},
                {"survivors", r.survivors.size()}};
}

}  // namespace

Json to_json(const PipelineResult& r) {
    return Json{{"first_stage", refine_json(r.first)},
                {"second_stage", refine_json(r.second)},
                {"final", to_json(r.dropped.partition)},
                {"count_trace", r.dropped.count_trace},
                {"survivor_fraction", r.survivor_fraction}};
}

Json to_json(const ScalingReport& r) {
    return Json{{"kind", to_string(r.kind)},
                {"norm_form", to_string(r.norm_form)},
                {"n", r.n},
                {"u", r.u},
                {"v", r.v},
                {"M", r.M_values},
                {"ratios", r.ratios},
                {"pairings", r.pairings},
                {"left_norms", r.left_norms},
                {"right_norms", r.right_norms},
                {"fitted_slope", r.fitted_slope},
                {"predicted_slope", r.predicted_slope},
                {"deviation", r.deviation()}};
}

Json to_json(const InteractionStats& s) { return Json{{"alpha", s.alpha}, {"beta", s.beta}}; }

Json to_json(const MlEReport& r) {
    return Json{{"n", r.n},
                {"first", to_json(r.first)},
                {"second", to_json(r.second)},
                {"halved", r.halved},
                {"measure_F", r.measure_F},
                {"measure_E2", r.measure_E2},
                {"bound", r.bound},
                {"ratio", r.ratio},
                {"c", r.c},
                {"status", to_string(r.status)},
                {"note", r.note}};
}

Json to_json(const ExponentCandidate& c) {
    return Json{{"r1", c.r1}, {"r2", c.r2}, {"s1", c.s1}, {"s2", c.s2}, {"origin", c.origin}};
}

Json to_json(const CandidateCheck& c) {
    return Json{{"r_sum", c.r_sum}, {"s_sum", c.s_sum}, {"strict", c.strict}, {"margin", c.margin}, {"ok", c.ok()}};
}

Json to_json(const MlFReport& r) {
    Json cands = Json::array();
    for (const auto& sc : r.candidates)
        cands.push_back(Json{{"candidate", to_json(sc.candidate)},
                             {"check", to_json(sc.check)},
                             {"bound", sc.bound},
                             {"ratio", sc.ratio}});
    return Json{{"n", r.n},
                {"first", to_json(r.first)},
                {"second", to_json(r.second)},
                {"halved", r.halved},
                {"measure_F2", r.measure_F2},
                {"candidates", std::move(cands)},
                {"best", r.best},
                {"max_bound_ratio", r.max_bound_ratio},
                {"best_ratio", r.best_ratio},
                {"c", r.c},
                {"status", to_string(r.status)},
                {"note", r.note}};
}

Json to_json(const HypothesisCheck& c) {
    return Json{{"ok", c.ok}, {"violated", c.violated}, {"exponent_E", c.exponent_E}, {"exponent_F", c.exponent_F}};
}

Json to_json(const JacobianChain& c) {
    return Json{{"integral", c.integral},
                {"bound", c.bound},
                {"constant", c.constant},
                {"starts", c.starts},
                {"paths", c.paths}};
}

Json to_json(const InteractionClassKey& k) {
    return Json{{"eps_exp", k.eps_exp}, {"eta_exp", k.eta_exp}, {"i", k.i}};
}

Json to_json(const Classification& c) {
    Json levels = Json::array();
    for (const auto& li : c.levels)
        levels.push_back(Json{{"j", li.j},
                              {"measure", li.measure},
                              {"S", li.S},
                              {"eps_exp", li.eps_exp},
                              {"eta_exp", li.eta_exp}});
    Json classes = Json::array();
    for (const auto& [key, js] : c.classes) classes.push_back(Json{{"key", to_json(key)}, {"levels", js}});
    return Json{{"A", c.A},
                {"measure_F", c.measure_F},
                {"levels", std::move(levels)},
                {"zero", c.zero},
                {"classes", std::move(classes)}};
}

Json to_json(const OverlapReport& r) {
    Json pairs = Json::array();
    for (const auto& p : r.pairs) pairs.push_back(Json{{"a", p.a}, {"b", p.b}, {"overlap", p.overlap}});
    return Json{{"sum", r.sum},
                {"measure_F", r.measure_F},
                {"ratio", r.ratio},
                {"C_audit", r.C_audit},
                {"pass", r.pass},
                {"pairs", std::move(pairs)}};
}

Json to_json(const TwoBoundReport& r) {
    return Json{{"key", to_json(r.key)},
                {"count", r.count},
                {"lambda", r.lambda},
                {"eta_exp", r.eta_exp},
                {"measured", r.measured},
                {"bound1", r.bound1},
                {"bound2", r.bound2},
                {"ratio1", r.ratio1},
                {"ratio2", r.ratio2},
                {"ratio_min", r.ratio_min},
                {"first_binding", r.first_binding}};
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string config_hash(const Json& effective_config, std::uint64_t seed) {
    const std::string text = effective_config.dump() + "#" + std::to_string(seed);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
    require(width_ > 0, "CsvWriter: empty header");
    line(header);
}

std::string CsvWriter::quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void CsvWriter::line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) text_ += ',';
        text_ += quote(fields[i]);
    }
    text_ += "\r\n";
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    require(cells.size() == width_, "CsvWriter: row has " + std::to_string(cells.size()) + " fields, header has " +
                                        std::to_string(width_));
    std::vector<std::string> fields;
    fields.reserve(cells.size());
    for (const auto& c : cells) {
        if (const auto* s = std::get_if<std::string>(&c)) fields.push_back(*s);
        else if (const auto* d = std::get_if<double>(&c)) fields.push_back(format_double(*d));
        else fields.push_back(std::to_string(std::get<long long>(c)));
    }
    line(fields);
    ++rows_;
}

std::string CsvWriter::str() const { return text_; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw IoError("cannot parse " + path.string() + ": " + e.what());
    }
}

}  // namespace mclab
