#include "gsda/io.hpp"

#include "gsda/ingestion.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gsda {

nlohmann::json to_json(const DistortionReport& r) {
  return {{"d_norm", r.d_norm}, {"d_chamfer", r.d_chamfer}, {"d_hausdorff", r.d_hausdorff},
          {"d_geo", r.d_geo},   {"e_delta", r.e_delta}};
}

nlohmann::json to_json(const AttackConfig& cfg) {
  return {{"mode", attack_mode_string(cfg)},
          {"epsilon", cfg.epsilon},
          {"iters", cfg.iters},
          {"lr", cfg.lr},
          {"adam_beta1", cfg.adam_beta1},
          {"adam_beta2", cfg.adam_beta2},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"chamfer_weight", cfg.chamfer_weight},
          {"hausdorff_weight", cfg.hausdorff_weight},
          {"lfc_fraction", cfg.lfc_fraction},
          {"k", cfg.k},
          {"poly_len", cfg.poly_len},
          {"binary_search_steps", cfg.binary_search_steps},
          {"seed", cfg.seed}};
}

nlohmann::json to_json(const AttackResult& r) {
  return {{"success", r.success},
          {"predicted", r.predicted},
          {"iterations", r.iterations_used},
          {"beta1", r.beta1},
          {"report", to_json(r.report)}};
}

AttackMode parse_attack_mode(const std::string& text, int* target) {
  if (text == "untargeted") return AttackMode::untargeted;
  const std::string prefix = "targeted:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const int t = std::stoi(text.substr(prefix.size()), &used);
      if (used + prefix.size() != text.size()) throw std::invalid_argument(text);
      if (target) *target = t;
      return AttackMode::targeted;
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed attack mode '" + text + "'");
    }
  }
  throw std::invalid_argument("attack mode must be 'untargeted' or 'targeted:<label>'");
}

std::string attack_mode_string(const AttackConfig& cfg) {
  return cfg.mode == AttackMode::targeted ? "targeted:" + std::to_string(cfg.target) : "untargeted";
}

std::string distortion_csv_row(const DistortionReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", r.d_norm, r.d_chamfer, r.d_hausdorff, r.d_geo,
                r.e_delta);
  return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "iteration,loss,e_delta\n";
  char buf[96];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const int len = std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, trace[i].loss, trace[i].e_delta);
    out.write(buf, len);
  }
}

void save_dataset(const std::filesystem::path& dir, const Dataset& data) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "index.csv");
  if (!index) throw std::runtime_error("cannot write " + (dir / "index.csv").string());
  index << "file,label\n";
  char name[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(name, sizeof name, "%05zu.xyz", i);
    save_xyz(dir / name, data[i].points);
    index << name << ',' << data[i].label << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream index(dir / "index.csv");
  if (!index) throw std::runtime_error("cannot open " + (dir / "index.csv").string());
  std::string line;
  std::getline(index, line);
  if (line != "file,label") throw ParseError("dataset index must start with 'file,label'", 1);
  Dataset out;
  std::size_t line_no = 1;
  while (std::getline(index, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'file,label'", line_no);
    LabeledCloud sample;
    sample.points = load_xyz(dir / line.substr(0, comma));
    try {
      sample.label = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("non-numeric label", line_no);
    }
    out.push_back(std::move(sample));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gsda
