// causalflag command-line driver. Builds a JSON config from --config and flags
// (flags win), runs it through the C library and writes report.json / *.csv.
//
// Exit codes: 0 PASS, 2 property violation (report still written), 1 error.

#include "causalflag/causalflag.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config, out, model, rep, triple, points, limit_points, queries, domain;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_word_len, i, n_points, n_limit, scan;
  std::optional<long long> cap, trials, triples, photons, probes, samples, n_queries;
  std::vector<double> eps, x, y;
  std::vector<std::string> tolerances;
  bool csv = false;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// JSON file, or CSV of numeric rows (one vector per row).
json load_points(const std::string& path) {
  const std::string text = slurp(path);
  if (path.size() < 4 || path.substr(path.size() - 4) != ".csv") return json::parse(text);
  json rows = json::array();
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    json row = json::array();
    std::istringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (numeric && !row.empty()) rows.push_back(row);
  }
  return rows;
}

json build_config(const std::string& command, const Flags& f) {
  json cfg = json::object();
  if (!f.config.empty()) {
    cfg = json::parse(slurp(f.config));
    if (!cfg.is_object()) throw std::runtime_error("config file must hold a JSON object");
    if (cfg.contains("command") && cfg["command"] != command)
      throw std::runtime_error("config file is for " + cfg["command"].get<std::string>());
  }
  cfg["command"] = command;
  if (f.seed) cfg["seed"] = *f.seed;
  if (!f.model.empty()) cfg["model"] = f.model;
  if (!f.rep.empty()) cfg["rep"] = f.rep;
  if (f.max_word_len) cfg["max_word_len"] = *f.max_word_len;
  if (f.cap) cfg[command == "rep-gap" ? "cap" : "per_length_cap"] = *f.cap;
  if (f.i) cfg["i"] = *f.i;
  if (f.trials) cfg["trials"] = *f.trials;
  if (f.triples) cfg["triples"] = *f.triples;
  if (f.photons) cfg["photons"] = *f.photons;
  if (f.probes) cfg["probes"] = *f.probes;
  if (f.samples) cfg["samples"] = *f.samples;
  if (f.n_points) cfg["n_points"] = *f.n_points;
  if (f.n_limit) cfg["n_limit"] = *f.n_limit;
  if (f.n_queries) cfg["n_queries"] = *f.n_queries;
  if (f.scan) cfg["scan"] = *f.scan;
  if (!f.domain.empty()) cfg["domain"] = f.domain;
  if (!f.eps.empty()) cfg["eps"] = f.eps.size() == 1 ? json(f.eps[0]) : json(f.eps);
  auto coords = [](const std::vector<double>& v) { return v.size() == 1 ? json(v[0]) : json(v); };
  if (!f.x.empty()) cfg["x"] = coords(f.x);
  if (!f.y.empty()) cfg["y"] = coords(f.y);
  if (!f.triple.empty()) cfg["triple"] = json::parse(slurp(f.triple));
  if (!f.points.empty()) cfg["points"] = load_points(f.points);
  if (!f.limit_points.empty()) cfg["limit_points"] = load_points(f.limit_points);
  if (!f.queries.empty()) cfg["queries"] = load_points(f.queries);
  for (const auto& t : f.tolerances) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--tol expects name=value");
    cfg["tolerances"][t.substr(0, eq)] = std::stod(t.substr(eq + 1));
  }
  if (f.csv) cfg["csv"] = true;
  if (!f.out.empty()) cfg["out"] = f.out;
  return cfg;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + p.string());
  o << text;
}

std::string summary_line(const std::string& command, const json& report) {
  std::string s = command + ": " + report.value("status", "?");
  if (report.contains("error")) s += " " + report["error"].value("code", "");
  const auto& r = report.contains("result") ? report["result"] : json::object();
  if (command == "maslov" && r.contains("idx")) s += " idx=" + std::to_string(r["idx"].get<int>());
  if (r.contains("violations") && r["violations"].is_number())
    s += " violations=" + std::to_string(r["violations"].get<long long>());
  if (r.contains("failures")) s += " failures=" + std::to_string(r["failures"].get<long long>());
  if (r.contains("distance")) s += " distance=" + r["distance"].dump();
  return s;
}

int run(const std::string& command, const Flags& f) {
  json cfg;
  try {
    cfg = build_config(command, f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const std::string out_dir = cfg.value("out", std::string());
  const bool csv = cfg.value("csv", false);
  cf_report* rep = nullptr;
  const cf_status st = cf_run(cfg.dump().c_str(), &rep);
  if (st != CF_OK) {
    std::cerr << "error: " << cf_last_error() << "\n";
    const char* help = nullptr;
    if (cf_command_help(command.c_str(), &help) == CF_OK) std::cerr << help;
    return 1;
  }
  const std::string text = cf_report_json(rep);
  const bool pass = cf_report_verdict(rep) == CF_PASS;
  try {
    const json report = json::parse(text);
    if (out_dir.empty()) {
      std::cout << text;
      std::cerr << summary_line(command, report) << "\n";
    } else {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "report.json", text);
      if (csv)
        for (std::size_t k = 0; k < cf_report_table_count(rep); ++k)
          write_file(fs::path(out_dir) / (std::string(cf_report_table_name(rep, k)) + ".csv"),
                     cf_report_table_csv(rep, k));
      std::cout << summary_line(command, report) << "\n";
    }
  } catch (const std::exception& e) {
    cf_report_free(rep);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  cf_report_free(rep);
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causalflag: causal structure, Maslov indices and Anosov samples on Shilov boundaries"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cf_version()));
  Flags f;
  std::map<std::string, CLI::App*> subs;
  for (std::size_t k = 0; k < cf_command_count(); ++k) {
    const std::string name = cf_command_name(k);
    const char* help = nullptr;
    cf_command_help(name.c_str(), &help);
    std::string help_text = help ? help : "";
    auto* sub = app.add_subcommand(name, help_text.substr(help_text.find(": ") + 2, help_text.find('\n') - help_text.find(": ") - 2));
    sub->footer("config keys and defaults:\n" + help_text.substr(help_text.find('\n') + 1));
    sub->add_option("--config", f.config, "JSON config file (flags win on conflict)");
    sub->add_option("--out", f.out, "output directory for report.json and CSV tables");
    sub->add_flag("--csv", f.csv, "also write CSV tables");
    sub->add_option("--seed", f.seed, "root seed (default 0)");
    sub->add_option("--model", f.model, "model id: sp4, su22, sostar8, so42, ...");
    sub->add_option("--rep", f.rep, "preset representation id");
    sub->add_option("--max-word-len", f.max_word_len, "maximal word length");
    sub->add_option("--cap", f.cap, "word cap (ball size for rep-gap, words per length otherwise)");
    sub->add_option("--eps", f.eps, "deformation sizes")->delimiter(',');
    sub->add_option("--i", f.i, "positive index of the orbit");
    sub->add_option("--trials", f.trials, "number of seeded trials");
    sub->add_option("--triple", f.triple, "JSON file with a triple of points");
    sub->add_option("--triples", f.triples, "number of limit-point triples");
    sub->add_option("--photons", f.photons, "number of photons");
    sub->add_option("--scan", f.scan, "parameters per photon scan");
    sub->add_option("--probes", f.probes, "number of probes");
    sub->add_option("--samples", f.samples, "number of samples");
    sub->add_option("--n-points", f.n_points, "number of random chart points");
    sub->add_option("--n-limit", f.n_limit, "size of the spacelike-circle limit sample");
    sub->add_option("--n-queries", f.n_queries, "number of random query points");
    sub->add_option("--points", f.points, "JSON or CSV file of chart points");
    sub->add_option("--limit-points", f.limit_points, "JSON or CSV file of limit points");
    sub->add_option("--queries", f.queries, "JSON or CSV file of query points");
    sub->add_option("--domain", f.domain, "interval or disk");
    sub->add_option("--x", f.x, "affine coordinates of x")->delimiter(',');
    sub->add_option("--y", f.y, "affine coordinates of y")->delimiter(',');
    sub->add_option("--tol", f.tolerances, "tolerance override name=value, within [1e-14, 1e-3]");
    subs[name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) return run(name, f);
  return 1;
}
