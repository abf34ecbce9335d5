#ifndef GSDA_IO_HPP
#define GSDA_IO_HPP

#include "gsda/attack.hpp"
#include "gsda/defense.hpp"
#include "gsda/metrics.hpp"
#include "gsda/victim.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace gsda {

nlohmann::json to_json(const DistortionReport& r);
nlohmann::json to_json(const AttackConfig& cfg);
/// Summary record (no point data, no trace).
nlohmann::json to_json(const AttackResult& r);

AttackMode parse_attack_mode(const std::string& text, int* target);
std::string attack_mode_string(const AttackConfig& cfg);

inline constexpr const char* kDistortionCsvHeader = "d_norm,d_chamfer,d_hausdorff,d_geo,e_delta";
std::string distortion_csv_row(const DistortionReport& r);

/// "iteration,loss,e_delta".
void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace);

/// Dataset directory: index.csv ("file,label") plus one XYZ file per sample.
void save_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace gsda

#endif  // GSDA_IO_HPP
