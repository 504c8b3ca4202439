#include "emx/cli.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "emx/csv.hpp"
#include "emx/model_io.hpp"
#include "emx/pipeline.hpp"
#include "emx/synth.hpp"
#include "json.hpp"

namespace emx::cli {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kFitKeys = {"cp", "minsplit", "minbucket", "xval", "max_depth"};

const std::vector<std::string> kSynthKeys = {
    "vehicles",      "model_lines",     "regions",        "positive_fraction", "noise_sigma",
    "retest_r",      "scrapped_co2",    "exported_offset", "on_road_offset"};

std::vector<std::string> build_keys() {
  std::vector<std::string> keys = {"seed", "window.start", "window.end"};
  keys.insert(keys.end(), kFitKeys.begin(), kFitKeys.end());
  for (Pollutant p : kAllPollutants) {
    for (const auto& k : kFitKeys) keys.push_back(std::string(to_string(p)) + "." + k);
  }
  for (const char* k : {"holdout.fraction", "lowess.span", "lowess.iterations", "euro.standards",
                        "region.min_n", "policy", "qc.backdating_days", "threads"}) {
    keys.push_back(k);
  }
  keys.insert(keys.end(), kSynthKeys.begin(), kSynthKeys.end());
  return keys;
}

ExitCode exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return ExitCode::invalid_argument;
    case ErrorCode::parse: return ExitCode::parse;
    case ErrorCode::schema_mismatch: return ExitCode::schema_mismatch;
    case ErrorCode::version_mismatch: return ExitCode::version_mismatch;
    case ErrorCode::io: return ExitCode::io;
    case ErrorCode::infeasible: return ExitCode::infeasible;
    case ErrorCode::not_found: return ExitCode::not_found;
  }
  return ExitCode::internal;
}

void error_line(std::ostream& err, std::string_view code, std::string_view message) {
  err << "error code=" << code << " message=" << nlohmann::json(std::string(message)).dump()
      << '\n';
}

Error bad_value(const std::string& key, const std::string& value, std::string_view expected) {
  return Error(ErrorCode::invalid_argument,
               "bad value '" + value + "' for " + key + ": expected " + std::string(expected));
}

// Flag values override config-file values key by key.
class Settings {
 public:
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::string> file;

  void load_config(const fs::path& path) {
    if (!fs::is_regular_file(path)) {
      throw Error(ErrorCode::not_found, "config file not found: " + path.string());
    }
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text.str());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse, "config " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) {
      throw Error(ErrorCode::schema_mismatch, "config must be one flat JSON object");
    }
    const auto& keys = config_keys();
    for (const auto& [key, value] : doc.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw Error(ErrorCode::invalid_argument, "unknown config key: " + key);
      }
      if (value.is_string()) {
        file[key] = value.get<std::string>();
      } else if (value.is_number() || value.is_boolean()) {
        file[key] = value.dump();
      } else if (!value.is_null()) {
        throw Error(ErrorCode::schema_mismatch, "config key " + key + " must be a scalar");
      }
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    if (const auto it = options.find(key); it != options.end() && it->second->count() > 0) {
      return flags.at(key);
    }
    if (const auto it = file.find(key); it != file.end()) return it->second;
    return std::nullopt;
  }

  std::optional<double> number(const std::string& key) const {
    const auto text = get(key);
    if (!text) return std::nullopt;
    const auto v = parse_double(*text);
    if (!v) throw bad_value(key, *text, "a number");
    return v;
  }

  std::optional<long long> integer(const std::string& key, long long min) const {
    const auto text = get(key);
    if (!text) return std::nullopt;
    const auto v = parse_int(*text);
    if (!v || *v < min) throw bad_value(key, *text, "an integer >= " + std::to_string(min));
    return v;
  }

  std::optional<Date> date(const std::string& key) const {
    const auto text = get(key);
    if (!text) return std::nullopt;
    const auto d = parse_date(*text);
    if (!d || !d->ok()) throw bad_value(key, *text, "a YYYY-MM-DD date");
    return d;
  }

  std::uint64_t seed(bool required) const {
    const auto v = integer("seed", 0);
    if (!v && required) {
      throw Error(ErrorCode::invalid_argument, "this step is stochastic and needs --seed");
    }
    return v ? static_cast<std::uint64_t>(*v) : 1;
  }

  fleet::Window window() const {
    fleet::Window w;
    if (const auto d = date("window.start")) w.start = *d;
    if (const auto d = date("window.end")) w.end = *d;
    fleet::validate(w);
    return w;
  }

  pipeline::RunConfig run_config(bool stochastic) const {
    pipeline::RunConfig c;
    c.seed = seed(stochastic);
    c.window = window();
    for (Pollutant p : kAllPollutants) {
      const std::string prefix = std::string(to_string(p)) + ".";
      const auto pick_int = [&](const std::string& k, long long min) {
        auto v = integer(prefix + k, min);
        return v ? v : integer(k, min);
      };
      cart::FitParams base;
      base.seed = c.seed;
      if (auto v = number(prefix + "cp"); v || (v = number("cp"))) base.cp = *v;
      if (auto v = pick_int("xval", 0)) base.xval = static_cast<int>(*v);
      if (auto v = pick_int("max_depth", 1)) base.max_depth = static_cast<int>(*v);
      const auto ms = pick_int("minsplit", 1);
      const auto mb = pick_int("minbucket", 1);
      auto params = cart::FitParams::with_sizes(
          ms ? std::optional<int>(static_cast<int>(*ms)) : std::nullopt,
          mb ? std::optional<int>(static_cast<int>(*mb)) : std::nullopt, base);
      cart::validate(params);
      c.fit[index_of(p)] = params;
    }
    if (const auto v = number("holdout.fraction")) {
      if (!(*v >= 0.0 && *v < 1.0)) throw bad_value("holdout.fraction", *get("holdout.fraction"), "[0, 1)");
      c.holdout_fraction = *v;
    }
    if (const auto v = number("lowess.span")) {
      if (!(*v > 0.0 && *v <= 1.0)) throw bad_value("lowess.span", *get("lowess.span"), "(0, 1]");
      c.smoothing.span = *v;
    }
    if (const auto v = integer("lowess.iterations", 0)) c.smoothing.iterations = static_cast<int>(*v);
    if (const auto v = get("euro.standards")) c.euro_standards = fs::path(*v);
    if (const auto v = integer("region.min_n", 1)) c.region_min_n = static_cast<std::size_t>(*v);
    if (const auto v = get("policy")) {
      const auto policy = impute::parse_policy(*v);
      if (!policy) throw bad_value("policy", *v, "tree-only or prefer-measured");
      c.policy = *policy;
    }
    if (const auto v = get("qc.backdating_days")) {
      if (*v == "none") {
        c.qc.backdating_window_days.reset();
      } else {
        c.qc.backdating_window_days = static_cast<int>(*integer("qc.backdating_days", 0));
      }
    }
    if (const auto v = integer("threads", 0)) c.threads = static_cast<unsigned>(*v);
    return c;
  }

  synth::GeneratorSpec generator_spec() const {
    synth::GeneratorSpec s;
    s.seed = seed(true);
    s.window = window();
    if (const auto v = integer("vehicles", 1)) s.vehicles = static_cast<std::size_t>(*v);
    if (const auto v = integer("model_lines", 1)) s.model_lines = static_cast<std::size_t>(*v);
    if (const auto v = integer("regions", 0)) s.regions.count = static_cast<std::size_t>(*v);
    if (s.regions.count <= s.regions.sparse) s.regions.sparse = s.regions.count / 10;
    if (const auto v = number("positive_fraction")) s.regions.positive_fraction = *v;
    if (const auto v = number("retest_r")) s.retest_r = *v;
    if (const auto v = number("noise_sigma")) {
      s.retest_r.reset();
      s.sigma.fill(*v);
    }
    if (const auto v = number("scrapped_co2")) s.scrapped_co2 = *v;
    if (const auto v = number("exported_offset")) s.exported_offset = *v;
    if (const auto v = number("on_road_offset")) s.on_road_offset = *v;
    synth::validate(s);
    return s;
  }
};

void add_settings(CLI::App& app, Settings& settings, const std::vector<std::string>& keys,
                  const std::string& group) {
  for (const auto& key : keys) {
    auto* opt = app.add_option(flag_of(key), settings.flags[key], "config key " + key);
    opt->group(group);
    settings.options[key] = opt;
  }
}

void ensure_inputs(std::initializer_list<std::pair<const std::string*, std::string_view>> inputs) {
  for (const auto& [path, what] : inputs) {
    if (!fs::is_regular_file(*path)) {
      throw Error(ErrorCode::not_found, std::string(what) + " not found: " + *path);
    }
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = build_keys();
  return keys;
}

std::string flag_of(const std::string& key) {
  std::string flag = "--" + key;
  for (char& c : flag) {
    if (c == '.' || c == '_') c = '-';
  }
  return flag;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicle emissions imputation and fleet analytics", "emx"};
  app.require_subcommand(1);

  Settings settings;
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of flat dotted keys; flags override it");

  std::vector<std::string> shared;
  const auto& keys = config_keys();
  for (const auto& k : keys) {
    if (std::find(kSynthKeys.begin(), kSynthKeys.end(), k) == kSynthKeys.end()) shared.push_back(k);
  }
  add_settings(app, settings, shared, "Parameters");

  std::string inspections, certifications, models, imputed, out_path, dir, model;

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  synth_cmd->add_option("--out", out_path, "output directory")->required();
  add_settings(*synth_cmd, settings, kSynthKeys, "Generator");

  auto* qc_cmd = app.add_subcommand("qc", "Reject invalid inspection records");
  qc_cmd->add_option("--inspections", inspections, "inspections CSV")->required();
  qc_cmd->add_option("--out", out_path, "output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Fit one tree per pollutant");
  train_cmd->add_option("--inspections", inspections, "clean inspections CSV")->required();
  train_cmd->add_option("--certifications", certifications, "certifications CSV")->required();
  train_cmd->add_option("--out", out_path, "model directory")->required();

  auto* validate_cmd = app.add_subcommand("validate", "Holdout accuracy of the trees");
  validate_cmd->add_option("--inspections", inspections, "clean inspections CSV")->required();
  validate_cmd->add_option("--certifications", certifications, "certifications CSV")->required();
  validate_cmd->add_option("--models", models, "model directory")->required();
  validate_cmd->add_option("--out", out_path, "output directory")->required();

  auto* impute_cmd = app.add_subcommand("impute", "Impute per-vehicle emissions");
  impute_cmd->add_option("--inspections", inspections, "clean inspections CSV")->required();
  impute_cmd->add_option("--certifications", certifications, "certifications CSV (prefer-measured)");
  impute_cmd->add_option("--models", models, "model directory")->required();
  impute_cmd->add_option("--out", out_path, "output directory")->required();

  auto* aggregate_cmd = app.add_subcommand("aggregate", "Fleet classification and analytics tables");
  aggregate_cmd->add_option("--inspections", inspections, "clean inspections CSV")->required();
  aggregate_cmd->add_option("--imputed", imputed, "imputed emissions CSV")->required();
  aggregate_cmd->add_option("--out", out_path, "output directory")->required();

  auto* report_cmd = app.add_subcommand("report", "Concatenate the analytics CSV set");
  report_cmd->add_option("--dir", dir, "directory holding the analytics tables")->required();
  report_cmd->add_option("--out", out_path, "output file (default stdout)");

  auto* dot_cmd = app.add_subcommand("export-dot", "Graphviz diagram of a tree");
  dot_cmd->add_option("--model", model, "tree JSON")->required();
  dot_cmd->add_option("--out", out_path, "output file (default stdout)");

  auto* run_cmd = app.add_subcommand("run", "qc, train, validate, impute, aggregate and report");
  run_cmd->add_option("--inspections", inspections, "inspections CSV")->required();
  run_cmd->add_option("--certifications", certifications, "certifications CSV")->required();
  run_cmd->add_option("--out", out_path, "output directory")->required();

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_line(err, "usage", e.what());
    return ExitCode::usage;
  }

  try {
    if (!config_path.empty()) settings.load_config(config_path);

    if (synth_cmd->parsed()) {
      const auto spec = settings.generator_spec();
      const auto corpus = synth::generate(spec);
      fs::create_directories(out_path);
      synth::write_corpus(corpus, out_path);
      out << "records " << corpus.inspections.size() << "\ncertification_rows "
          << corpus.certifications.size() << '\n';
    } else if (qc_cmd->parsed()) {
      ensure_inputs({{&inspections, "inspections"}});
      const auto report = pipeline::run_qc(inspections, out_path, settings.run_config(false));
      ingest::write_qc_report(out, report);
    } else if (train_cmd->parsed()) {
      ensure_inputs({{&inspections, "inspections"}, {&certifications, "certifications"}});
      const auto trees = pipeline::run_train(inspections, certifications, out_path,
                                             settings.run_config(true));
      for (Pollutant p : kAllPollutants) {
        const auto& t = trees[index_of(p)];
        out << to_string(p) << " nsplit " << t.split_count() << " rel_error "
            << format_number(t.relative_error()) << '\n';
      }
    } else if (validate_cmd->parsed()) {
      ensure_inputs({{&inspections, "inspections"}, {&certifications, "certifications"}});
      const auto reports = pipeline::run_validate(inspections, certifications, models, out_path,
                                                  settings.run_config(true));
      for (const auto& r : reports) {
        out << to_string(r.pollutant) << " holdout_r " << format_number(r.pearson_r) << '\n';
      }
    } else if (impute_cmd->parsed()) {
      ensure_inputs({{&inspections, "inspections"}});
      std::optional<fs::path> certs;
      if (!certifications.empty()) {
        ensure_inputs({{&certifications, "certifications"}});
        certs = certifications;
      }
      const auto result =
          pipeline::run_impute(inspections, certs, models, out_path, settings.run_config(false));
      out << "imputed " << result.imputed.size() << "\nskipped " << result.total_skipped() << '\n';
    } else if (aggregate_cmd->parsed()) {
      ensure_inputs({{&inspections, "inspections"}, {&imputed, "imputed emissions"}});
      pipeline::run_aggregate(inspections, imputed, out_path, settings.run_config(true));
    } else if (report_cmd->parsed()) {
      if (out_path.empty()) {
        pipeline::run_report(dir, out);
      } else {
        auto file = csv::open_output(out_path);
        pipeline::run_report(dir, file);
      }
    } else if (dot_cmd->parsed()) {
      ensure_inputs({{&model, "model file"}});
      const auto text = model_io::export_dot(model_io::load(model));
      if (out_path.empty()) {
        out << text;
      } else {
        auto file = csv::open_output(out_path);
        file << text;
        if (!file) throw Error(ErrorCode::io, "failed writing " + out_path);
      }
    } else if (run_cmd->parsed()) {
      ensure_inputs({{&inspections, "inspections"}, {&certifications, "certifications"}});
      pipeline::run_all(inspections, certifications, out_path, settings.run_config(true));
    }
  } catch (const Error& e) {
    error_line(err, to_string(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    error_line(err, "internal", e.what());
    return ExitCode::internal;
  }
  return ExitCode::ok;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("emx");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace emx::cli
