// io.hpp: CSV and JSON formats shared by the command-line tool
//
// Spectrum CSV:
//   # frame=absolute|detuning
//   # provenance=simulated|measured
//   # seed=<u64>                      (optional)
//   frequency_ghz,transmission
//   <f>,<T>
//
// Decay histogram CSV: header `time_ns,counts`.
// Numbers are written with 17 significant digits so a write/read round trip
// is lossless.

#pragma once

#include "cqed/collective.hpp"
#include "cqed/fitkit.hpp"
#include "cqed/spectrum.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cqed::io {

using json = nlohmann::ordered_json;

inline constexpr const char* spectrum_header = "frequency_ghz,transmission";
inline constexpr const char* histogram_header = "time_ns,counts";

std::string format_double(double x);

std::string format_spectrum_csv(const Spectrum& spectrum);
// Unknown extra columns are ignored and reported through `warnings`.
Spectrum parse_spectrum_csv(std::istream& in, std::vector<std::string>* warnings = nullptr);
Spectrum read_spectrum_csv(const std::filesystem::path& path,
                           std::vector<std::string>* warnings = nullptr);
void write_spectrum_csv(const Spectrum& spectrum, const std::filesystem::path& path);

std::string format_histogram_csv(const DecayHistogram& hist);
DecayHistogram parse_histogram_csv(std::istream& in, std::vector<std::string>* warnings = nullptr);
DecayHistogram read_histogram_csv(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings = nullptr);

json fit_result_json(const FitResult& result);
json collective_json(const CollectiveRates& rates, const DressedModes* modes = nullptr);

// Writes through a temporary file in the same directory, then renames.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace cqed::io
