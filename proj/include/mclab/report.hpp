#pragma once

// JSON forms of the library's results, an RFC-4180 CSV writer and the config
// hash embedded in every report.

#include "mclab/bands.hpp"
#include "mclab/dyadic.hpp"
#include "mclab/extremals.hpp"
#include "mclab/lattice.hpp"
#include "mclab/rational.hpp"
#include "mclab/towers.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Rationals travel as "p/q" strings so they stay exact.
template <>
struct nlohmann::adl_serializer<mclab::Rational> {
    template <class BasicJson>
    static void to_json(BasicJson& j, const mclab::Rational& q) {
        j = mclab::to_string(q);
    }
    template <class BasicJson>
    static void from_json(const BasicJson& j, mclab::Rational& q);
};

namespace mclab {

using Json = nlohmann::ordered_json;

// "p/q" or an integer; PreconditionError otherwise.
Rational parse_rational(const std::string& text);

// A file could not be read, written or parsed. The message names the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// {"n", "delta", "cells": [[i1..in], ...]}. Loading re-validates through
// LatticeSet::from_cells and the budget.
Json lattice_to_json(const LatticeSet& s);
LatticeSet lattice_from_json(const Json& j, std::size_t budget = default_cell_budget());

Json step_to_json(const StepFunction& f);
StepFunction step_from_json(const Json& j, std::size_t budget = default_cell_budget());

std::string to_string(IndexRole role);

Json to_json(const BandParams& p);
Json to_json(const BandCounts& c);
Json to_json(const BandPartition& p);
Json to_json(const PipelineResult& r);
Json to_json(const ScalingReport& r);
Json to_json(const InteractionStats& s);
Json to_json(const MlEReport& r);
Json to_json(const ExponentCandidate& c);
Json to_json(const CandidateCheck& c);
Json to_json(const MlFReport& r);
Json to_json(const HypothesisCheck& c);
Json to_json(const JacobianChain& c);
Json to_json(const InteractionClassKey& k);
Json to_json(const Classification& c);
Json to_json(const OverlapReport& r);
Json to_json(const TwoBoundReport& r);

// Shortest round-trip text for a double ("%.17g"); non-finite values as
// "inf", "-inf", "nan".
std::string format_double(double x);

// FNV-1a 64 over the compact dump of the effective config followed by the
// seed, as 16 hex digits.
std::string config_hash(const Json& effective_config, std::uint64_t seed);

class CsvWriter {
public:
    using Cell = std::variant<std::string, double, long long>;

    explicit CsvWriter(std::vector<std::string> header);
    // Throws PreconditionError when the width differs from the header.
    void row(const std::vector<Cell>& cells);
    std::string str() const;
    std::size_t rows() const { return rows_; }

    // Quotes when the field holds a comma, quote, CR or LF; inner quotes doubled.
    static std::string quote(const std::string& field);

private:
    void line(const std::vector<std::string>& fields);

    std::size_t width_;
    std::size_t rows_ = 0;
    std::string text_;
};

// Throw IoError naming the path; writing creates parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace mclab

template <class BasicJson>
void nlohmann::adl_serializer<mclab::Rational>::from_json(const BasicJson& j, mclab::Rational& q) {
    q = mclab::parse_rational(j.template get<std::string>());
}
