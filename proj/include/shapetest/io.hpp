#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "shapetest/core.hpp"
#include "shapetest/learn.hpp"
#include "shapetest/partition.hpp"

namespace shapetest {

using Json = nlohmann::json;

// {"dims":[...], "mass":[...]}; dims may be omitted for one axis.
Json pmf_to_json(const Pmf& p);
Pmf pmf_from_json(const Json& j, bool renormalize = false);
// One probability per line; blank lines and lines starting with '#' are skipped.
std::string pmf_to_text(const Pmf& p);
Pmf pmf_from_text(std::istream& in, bool renormalize = false);
// JSON when the first non-blank character is '{', text otherwise.
Pmf parse_pmf(const std::string& content, bool renormalize = false);
Pmf load_pmf(const std::string& path, bool renormalize = false);

// {"m":..., "counts":[...], "dims":[...]}; "m_nominal" is written when it
// differs from the realized total.
Json counts_to_json(const SampleCounts& c);
SampleCounts counts_from_json(const Json& j);
// JSON, or text with one count per line.
SampleCounts parse_counts(const std::string& content);
SampleCounts load_counts(const std::string& path);

// {"cells":[[lo,hi],...]} for one axis; {"dims":[...], "cells":[[[lo,hi],...],...]} per axis for grids.
Json partition_to_json(const IntervalPartition& part);
IntervalPartition partition_from_json(const Json& j);

Json verdict_to_json(const TestVerdict& v);
std::string verdict_to_text(const TestVerdict& v);
Json outcome_to_json(const LearnOutcome& o);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace shapetest
