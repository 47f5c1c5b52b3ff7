#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "siglift/signature.hpp"
#include "siglift/tensor.hpp"

namespace siglift {

// %.17g, so values survive a CSV round trip.
std::string format_double(double x);

// Header xi_0,...,xi_{d-1}; one row per sample.
void write_path_csv(std::ostream& os, const SamplePath& path);
SamplePath read_path_csv(std::istream& is);

// {kind, d, n, delta, seed}
nlohmann::json path_manifest(const SamplePath& path);
void apply_manifest(SamplePath& path, const nlohmann::json& manifest);

// Header t,l1_0,...,l1_{d-1},l2_0,...; one row per prefix state.
void write_prefix_csv(std::ostream& os, const std::vector<GradedTensor>& prefixes,
                      const std::vector<double>& times);
std::vector<GradedTensor> read_prefix_csv(std::istream& is, std::vector<double>* times = nullptr);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace siglift
