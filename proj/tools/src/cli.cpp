// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "emem/artifacts.hpp"
#include "emem/csv.hpp"
#include "emem/discovery.hpp"
#include "emem/echo.hpp"
#include "emem/error.hpp"
#include "emem/matching.hpp"
#include "emem/memstore.hpp"
#include "emem/numfmt.hpp"
#include "emem/sae.hpp"
#include "emem/stats.hpp"
#include "emem/tensorio.hpp"
#include "reports.hpp"

namespace emem::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Missing or contradictory arguments discovered after parsing; exits like a
// parse error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr stats::Condition kReportOrder[] = {stats::Condition::kA, stats::Condition::kC, stats::Condition::kB,
                                             stats::Condition::kBC};

struct Globals {
  std::string store;
  std::string config;
  std::string format = "text";
  std::uint64_t seed = 0;
  double threshold = matching::kDefaultThreshold;
  double alpha = echo::kOrientationAlpha;
  std::size_t k = echo::kDefaultK;
  std::string sae7, sae22, ref7, ref22;
};

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::string pct(const stats::ProportionCell& c) {
  if (!c.valid()) return "n/a";
  return fmt::format("{:.1f}% ({}/{})", c.percent_good(), c.good, c.valid());
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(std::span<const std::string> args);

 private:
  void define();
  void apply_config();
  void dispatch();

  Format format() const { return parse_format(g_.format); }
  bool set_on_command_line(const CLI::Option* opt) const { return opt && opt->count() > 0; }

  // Input handling: every path is checked and hashed before any compute.
  fs::path input(const std::string& path, std::string_view what) {
    if (path.empty()) throw UsageError(std::string(what) + " is required");
    if (!fs::exists(path)) fail(ErrorCode::kIo, std::string(what) + " '" + path + "' does not exist");
    prov_.add_input(path);
    return path;
  }
  std::string sae_path_for(Layer layer, const std::string& explicit_path) const {
    if (!explicit_path.empty()) return explicit_path;
    if (layer == kContextLayer) return g_.sae7;
    if (layer == kEmotionLayer) return g_.sae22;
    return {};
  }
  memstore::MemoryStore open_store() {
    if (g_.store.empty()) throw UsageError("--store (or EMEM_STORE) is required");
    return memstore::MemoryStore::open(g_.store);
  }
  void begin_report() {
    if (format() != Format::kJson) prov_.write_comment(out_);
  }

  std::vector<FeatureVector> load_vectors(const fs::path& path, Layer layer, const std::string& sae_path);
  const ActivationSnapshot& pick(const std::vector<ActivationSnapshot>& snaps, const std::string& label,
                                 Layer layer, std::string_view what);

  void cmd_discover();
  void cmd_geometry();
  void cmd_echo_build();
  void cmd_ref_stats();
  void cmd_store_put();
  void cmd_store_get();
  void cmd_store_list();
  void cmd_store_export();
  void cmd_store_set_norm();
  void cmd_recall(const std::string& query, const std::string& label, const std::string& delta_out);
  void cmd_match();
  void cmd_ratings();
  void cmd_decisions();

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"Emotional memory engine: feature discovery, echo vectors, context matching and experiment "
                "statistics.",
                "emem"};
  Globals g_;
  Provenance prov_;
  std::map<std::string, CLI::Option*> global_opts_;

  // Subcommands.
  CLI::App* discover_ = nullptr;
  CLI::App* echo_ = nullptr;
  CLI::App* echo_build_ = nullptr;
  CLI::App* ref_stats_ = nullptr;
  CLI::App* store_ = nullptr;
  CLI::App* store_put_ = nullptr;
  CLI::App* store_get_ = nullptr;
  CLI::App* store_list_ = nullptr;
  CLI::App* store_export_ = nullptr;
  CLI::App* store_set_norm_ = nullptr;
  CLI::App* store_recall_ = nullptr;
  CLI::App* recall_ = nullptr;
  CLI::App* match_ = nullptr;
  CLI::App* analyze_ = nullptr;
  CLI::App* geometry_ = nullptr;
  CLI::App* ratings_ = nullptr;
  CLI::App* decisions_ = nullptr;

  // Per-command arguments.
  struct {
    std::string probes, sae, profiles_out;
    Layer layer = kEmotionLayer;
    double hi = discovery::kDefaultHi, lo = discovery::kDefaultLo;
  } discover_args_;
  struct {
    std::string probes, sae, restrict_path, cosine_out, pca_out;
    Layer layer = kEmotionLayer;
  } geometry_args_;
  struct {
    std::string snapshots, sae, out;
    Layer layer = kEmotionLayer;
  } echo_args_;
  struct {
    std::string snapshots, sae, out, label;
    Layer layer = kContextLayer;
    bool set_store_norm = false;
  } ref_args_;
  struct {
    std::string id, context, context_label, emotion, emotion_label, echo, valence, semantic_label;
    std::int64_t created_at = -1;
  } put_args_;
  CLI::Option* semantic_label_opt_ = nullptr;
  std::string get_id_;
  struct {
    std::string id, out;
  } export_args_;
  CLI::Option* export_alpha_opt_ = nullptr;
  std::string set_norm_ref_;
  struct {
    std::string query, label, delta_out;
  } recall_args_, store_recall_args_;
  struct {
    std::string query, label;
  } match_args_;
  struct {
    std::string path, coding = "0,1,2,3", unit = "response";
    std::size_t iterations = 10000;
    unsigned workers = 1;
    bool two_sided = false;
  } ratings_args_;
  struct {
    std::string path;
    bool unpooled = false;
  } decisions_args_;
};

void Cli::define() {
  app_.fallthrough();
  app_.require_subcommand(1);
  app_.set_version_flag("--version", version_string());
  app_.footer(
      "Precedence: command-line flags override environment variables (EMEM_STORE, EMEM_CONFIG), which\n"
      "override values from the --config JSON file.");

  global_opts_["store"] = app_.add_option("--store", g_.store, "Memory store directory")->envname("EMEM_STORE");
  global_opts_["config"] =
      app_.add_option("--config", g_.config, "JSON file with default settings")->envname("EMEM_CONFIG");
  global_opts_["format"] =
      app_.add_option("--format", g_.format, "Report format")->check(CLI::IsMember({"text", "csv", "json"}));
  global_opts_["seed"] = app_.add_option("--seed", g_.seed, "Seed for randomized procedures");
  global_opts_["threshold"] = app_.add_option("--threshold", g_.threshold, "Context match threshold")
                                  ->check(CLI::Range(0.0, 1.0));
  global_opts_["alpha"] = app_.add_option("--alpha", g_.alpha, "Injection strength")->check(CLI::Range(0.0, 1.0));
  global_opts_["k"] = app_.add_option("--k", g_.k, "Distinctive features per echo")->check(CLI::PositiveNumber);
  global_opts_["sae7"] = app_.add_option("--sae7", g_.sae7, "Context-layer SAE weights (.emt)");
  global_opts_["sae22"] = app_.add_option("--sae22", g_.sae22, "Emotion-layer SAE weights (.emt)");
  global_opts_["ref7"] = app_.add_option("--ref7", g_.ref7, "Context-layer reference stats (.emt)");
  global_opts_["ref22"] = app_.add_option("--ref22", g_.ref22, "Emotion-layer reference stats (.emt)");

  discover_ = app_.add_subcommand("discover", "Find emotion-exclusive features in a probe corpus");
  discover_->add_option("probes", discover_args_.probes, "Probe container (features or residuals)")->required();
  discover_->add_option("--sae", discover_args_.sae, "SAE used to encode residual snapshots");
  discover_->add_option("--layer", discover_args_.layer, "Layer to analyse");
  discover_->add_option("--hi", discover_args_.hi, "Emotional activation must exceed this");
  discover_->add_option("--lo", discover_args_.lo, "Neutral activation must stay below this");
  discover_->add_option("--profiles-out", discover_args_.profiles_out, "Write per-emotion profiles (.emt)");

  echo_ = app_.add_subcommand("echo", "Echo vectors");
  echo_->require_subcommand(1);
  echo_build_ = echo_->add_subcommand("build", "Build echo vectors for a set of conditioning experiences");
  echo_build_->add_option("snapshots", echo_args_.snapshots, "Experience container")->required();
  echo_build_->add_option("--sae", echo_args_.sae, "SAE for the emotion layer");
  echo_build_->add_option("--layer", echo_args_.layer, "Layer of the experiences");
  echo_build_->add_option("--out", echo_args_.out, "Output container")->required();

  ref_stats_ = app_.add_subcommand("ref-stats", "Compute reference statistics over a corpus");
  ref_stats_->add_option("snapshots", ref_args_.snapshots, "Reference snapshot container")->required();
  ref_stats_->add_option("--sae", ref_args_.sae, "SAE for the chosen layer");
  ref_stats_->add_option("--layer", ref_args_.layer, "Layer of the corpus");
  ref_stats_->add_option("--label", ref_args_.label, "Corpus label recorded in the output");
  ref_stats_->add_option("--out", ref_args_.out, "Output container")->required();
  ref_stats_->add_flag("--set-store-norm", ref_args_.set_store_norm,
                       "Record the mean residual norm in the store (emotion layer only)");

  store_ = app_.add_subcommand("store", "Memory store operations");
  store_->require_subcommand(1);
  store_put_ = store_->add_subcommand("put", "Add a memory");
  store_put_->add_option("--id", put_args_.id, "Unique memory id")->required();
  store_put_->add_option("--context", put_args_.context, "Context-layer snapshot container")->required();
  store_put_->add_option("--context-label", put_args_.context_label, "Snapshot label within --context");
  store_put_->add_option("--emotion", put_args_.emotion, "Emotion-layer snapshot or feature container")->required();
  store_put_->add_option("--emotion-label", put_args_.emotion_label, "Label within --emotion");
  store_put_->add_option("--echo", put_args_.echo, "Echo container from 'echo build'")->required();
  store_put_->add_option("--valence", put_args_.valence, "Valence tag, e.g. threat or safe")->required();
  semantic_label_opt_ = store_put_->add_option("--semantic-label", put_args_.semantic_label,
                                               "Plain-text description stored with the memory");
  store_put_->add_option("--created-at", put_args_.created_at, "Creation time, unix milliseconds");
  store_get_ = store_->add_subcommand("get", "Show one memory");
  store_get_->add_option("id", get_id_, "Memory id")->required();
  store_list_ = store_->add_subcommand("list", "List memories in insertion order");
  store_export_ = store_->add_subcommand("export-delta", "Write a memory's scaled injection delta");
  store_export_->add_option("id", export_args_.id, "Memory id")->required();
  store_export_->add_option("--out", export_args_.out, "Output container")->required();
  store_set_norm_ = store_->add_subcommand("set-norm", "Record the emotion-layer mean residual norm");
  store_set_norm_->add_option("ref", set_norm_ref_, "Emotion-layer reference stats (.emt)")->required();
  store_recall_ = store_->add_subcommand("recall", "Match a context snapshot and return its echo");
  for (auto [sub, args] : {std::pair{store_recall_, &store_recall_args_}, {nullptr, &recall_args_}}) {
    if (!sub) sub = recall_ = app_.add_subcommand("recall", "Alias for 'store recall'");
    sub->add_option("query", args->query, "Context-layer query container")->required();
    sub->add_option("--label", args->label, "Snapshot label within the query container");
    sub->add_option("--delta-out", args->delta_out, "Write the scaled delta of the hit (.emt)");
  }

  match_ = app_.add_subcommand("match", "Rank stored memories against a context snapshot");
  match_->add_option("query", match_args_.query, "Context-layer query container")->required();
  match_->add_option("--label", match_args_.label, "Snapshot label within the query container");

  analyze_ = app_.add_subcommand("analyze", "Analyses");
  analyze_->require_subcommand(1);
  geometry_ = analyze_->add_subcommand("geometry", "Inter-emotion cosine matrix and PCA projection");
  geometry_->add_option("probes", geometry_args_.probes, "Probe container (features or residuals)")->required();
  geometry_->add_option("--sae", geometry_args_.sae, "SAE used to encode residual snapshots");
  geometry_->add_option("--layer", geometry_args_.layer, "Layer to analyse");
  geometry_->add_option("--restrict", geometry_args_.restrict_path,
                        "Restrict to the exclusive features recorded by 'discover --profiles-out'");
  geometry_->add_option("--cosine-out", geometry_args_.cosine_out, "Write the cosine matrix CSV here");
  geometry_->add_option("--pca-out", geometry_args_.pca_out, "Write the PCA projection CSV here");

  ratings_ = analyze_->add_subcommand("ratings", "Condition means, gradient slopes and permutation tests");
  ratings_->add_option("csv", ratings_args_.path, "Ratings CSV")->required();
  ratings_->add_option("--coding", ratings_args_.coding, "Numeric coding of safe,low,medium,high");
  ratings_->add_option("--iterations", ratings_args_.iterations, "Permutation iterations")
      ->check(CLI::PositiveNumber);
  ratings_->add_option("--workers", ratings_args_.workers, "Worker threads")->check(CLI::PositiveNumber);
  ratings_->add_flag("--two-sided", ratings_args_.two_sided, "Two-sided instead of one-sided greater");
  ratings_->add_option("--unit", ratings_args_.unit, "Permutation unit")
      ->check(CLI::IsMember({"response", "scenario"}));

  decisions_ = analyze_->add_subcommand("decisions", "Good-choice proportions and two-proportion z-tests");
  decisions_->add_option("csv", decisions_args_.path, "Decisions CSV")->required();
  decisions_->add_flag("--unpooled", decisions_args_.unpooled, "Unpooled variance in z-tests");

  store_export_->add_option("--alpha", g_.alpha, "Override the memory's default alpha");
}

// Fills any global left unset by flags and environment from the JSON config.
void Cli::apply_config() {
  if (g_.config.empty()) return;
  std::ifstream in(g_.config);
  if (!in) fail(ErrorCode::kIo, "cannot read config '" + g_.config + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformed, "config '" + g_.config + "': " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kMalformed, "config '" + g_.config + "' is not a JSON object");
  const std::map<std::string, std::function<void(const nlohmann::json&)>> setters = {
      {"store", [&](const nlohmann::json& v) { g_.store = v.get<std::string>(); }},
      {"format", [&](const nlohmann::json& v) { g_.format = v.get<std::string>(); }},
      {"seed", [&](const nlohmann::json& v) { g_.seed = v.get<std::uint64_t>(); }},
      {"threshold", [&](const nlohmann::json& v) { g_.threshold = v.get<double>(); }},
      {"alpha", [&](const nlohmann::json& v) { g_.alpha = v.get<double>(); }},
      {"k", [&](const nlohmann::json& v) { g_.k = v.get<std::size_t>(); }},
      {"sae7", [&](const nlohmann::json& v) { g_.sae7 = v.get<std::string>(); }},
      {"sae22", [&](const nlohmann::json& v) { g_.sae22 = v.get<std::string>(); }},
      {"ref7", [&](const nlohmann::json& v) { g_.ref7 = v.get<std::string>(); }},
      {"ref22", [&](const nlohmann::json& v) { g_.ref22 = v.get<std::string>(); }},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) fail(ErrorCode::kMalformed, "config '" + g_.config + "': unknown key '" + key + "'");
    if (set_on_command_line(global_opts_.at(key))) continue;
    if (key == "alpha" && set_on_command_line(export_alpha_opt_)) continue;
    try {
      it->second(value);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kMalformed, "config key '" + key + "': " + e.what());
    }
  }
  if (g_.format != "text" && g_.format != "csv" && g_.format != "json") {
    fail(ErrorCode::kMalformed, "config format '" + g_.format + "' is not text, csv or json");
  }
}

std::vector<FeatureVector> Cli::load_vectors(const fs::path& path, Layer layer, const std::string& sae_path) {
  auto container = tensorio::read_container_file(path);
  std::vector<FeatureVector> out;
  for (auto& [l, f] : features_from_container(container)) {
    if (l == layer) out.push_back(std::move(f));
  }
  if (!out.empty()) return out;
  auto snaps = snapshots_from_container(container);
  std::optional<SaeWeights> sae;
  for (const auto& s : snaps) {
    if (s.layer != layer) continue;
    if (!sae) {
      if (sae_path.empty()) throw UsageError("'" + path.string() + "' holds residuals; pass --sae to encode them");
      sae = load_sae(sae_path);
    }
    out.push_back(sae::encode(s, *sae));
  }
  if (out.empty()) {
    fail(ErrorCode::kNotFound, "'" + path.string() + "' has no layer-" + std::to_string(layer) + " vectors");
  }
  return out;
}

const ActivationSnapshot& Cli::pick(const std::vector<ActivationSnapshot>& snaps, const std::string& label,
                                    Layer layer, std::string_view what) {
  std::optional<std::string_view> want;
  if (!label.empty()) want = label;
  try {
    return select_snapshot(snaps, want, layer);
  } catch (const Error& e) {
    fail(e.code(), std::string(what) + ": " + e.what());
  }
}

void Cli::cmd_discover() {
  auto& a = discover_args_;
  auto probes = input(a.probes, "probe container");
  const std::string sae_path = sae_path_for(a.layer, a.sae);
  if (!sae_path.empty()) input(sae_path, "SAE");
  auto vectors = load_vectors(probes, a.layer, sae_path);

  discovery::ProbeCorpus corpus;
  for (auto& v : vectors) {
    const std::string cls(label_class(v.source_label));
    if (cls == "neutral") {
      corpus.neutral.push_back(std::move(v));
    } else {
      corpus.emotional.push_back({cls, std::move(v)});
    }
  }
  auto report = discovery::exclusive_features(corpus, a.hi, a.lo);

  if (!a.profiles_out.empty()) {
    tensorio::ContainerBuilder b;
    for (const auto& [emotion, profile] : report.per_emotion_profiles) {
      FeatureVector named = profile;
      named.source_label = emotion;
      add_features(b, a.layer, named);
    }
    std::vector<float> idx(report.exclusive_indices.begin(), report.exclusive_indices.end());
    if (!idx.empty()) b.add("exclusive_indices", idx);
    b.set_metadata("exclusive_count", std::to_string(idx.size()))
        .set_metadata("hi", format_exact(a.hi))
        .set_metadata("lo", format_exact(a.lo))
        .set_metadata("layer", std::to_string(a.layer));
    b.write_file(a.profiles_out);
  }

  // Per-feature diagnostics: the strongest emotional text and neutral ceiling.
  struct Row {
    FeatureIndex index;
    double max_emotional = 0.0, max_neutral = 0.0;
    std::string top;
  };
  std::vector<Row> rows;
  for (auto i : report.exclusive_indices) {
    Row r{i, 0.0, 0.0, {}};
    for (const auto& e : corpus.emotional) {
      if (e.features.values[i] > r.max_emotional) {
        r.max_emotional = e.features.values[i];
        r.top = e.features.source_label;
      }
    }
    for (const auto& n : corpus.neutral) r.max_neutral = std::max(r.max_neutral, double(n.values[i]));
    rows.push_back(r);
  }

  begin_report();
  if (format() == Format::kJson) {
    ojson j;
    j["provenance"] = ojson::parse(prov_.json());
    j["layer"] = a.layer;
    j["hi"] = a.hi;
    j["lo"] = a.lo;
    j["emotional_texts"] = corpus.emotional.size();
    j["neutral_texts"] = corpus.neutral.size();
    j["exclusive"] = ojson::array();
    for (const auto& r : rows) {
      j["exclusive"].push_back(
          {{"index", r.index}, {"max_emotional", r.max_emotional}, {"max_neutral", r.max_neutral}, {"top", r.top}});
    }
    out_ << j.dump(2) << '\n';
    return;
  }
  TextTable t({"index", "max_emotional", "max_neutral", "top_text"});
  for (const auto& r : rows) t.add({std::to_string(r.index), fixed(r.max_emotional, 3), fixed(r.max_neutral, 3), r.top});
  if (format() == Format::kCsv) {
    t.write_csv(out_);
    return;
  }
  out_ << fmt::format("exclusive features at layer {}: {} (emotional max > {}, neutral max < {}; {} emotional, {} "
                      "neutral texts)\n",
                      a.layer, rows.size(), format_exact(a.hi), format_exact(a.lo), corpus.emotional.size(),
                      corpus.neutral.size());
  t.write(out_);
}

void Cli::cmd_geometry() {
  auto& a = geometry_args_;
  auto probes = input(a.probes, "probe container");
  const std::string sae_path = sae_path_for(a.layer, a.sae);
  if (!sae_path.empty()) input(sae_path, "SAE");
  std::optional<std::vector<FeatureIndex>> restrict;
  if (!a.restrict_path.empty()) {
    auto c = tensorio::read_container_file(input(a.restrict_path, "restriction container"));
    restrict.emplace();
    if (const auto* t = c.find("exclusive_indices")) {
      for (float f : t->values) restrict->push_back(static_cast<FeatureIndex>(f));
    }
  }
  auto vectors = load_vectors(probes, a.layer, sae_path);

  std::map<std::string, std::vector<FeatureVector>> by_emotion;
  std::vector<FeatureVector> emotional;
  for (auto& v : vectors) {
    const std::string cls(label_class(v.source_label));
    if (cls == "neutral") continue;
    if (restrict) {
      std::vector<float> masked(v.values.size(), 0.0f);
      for (auto i : *restrict) {
        if (i >= masked.size()) fail(ErrorCode::kInvalidArgument, "restriction index out of range");
        masked[i] = v.values[i];
      }
      v.values = std::move(masked);
    }
    by_emotion[cls].push_back(v);
    emotional.push_back(std::move(v));
  }
  std::map<std::string, FeatureVector> profiles;
  for (const auto& [emotion, vs] : by_emotion) profiles[emotion] = discovery::mean_profile(vs);
  auto cos = discovery::cosine_matrix(profiles);
  auto pca = discovery::pca2(emotional);

  TextTable cos_table([&] {
    std::vector<std::string> h{"label"};
    h.insert(h.end(), cos.labels.begin(), cos.labels.end());
    return h;
  }());
  for (std::size_t r = 0; r < cos.size(); ++r) {
    std::vector<std::string> row{cos.labels[r]};
    for (std::size_t c = 0; c < cos.size(); ++c) row.push_back(fixed(cos.at(r, c), 4));
    cos_table.add(std::move(row));
  }
  TextTable pca_table({"label", "x", "y"});
  for (std::size_t k = 0; k < emotional.size(); ++k) {
    pca_table.add({emotional[k].source_label, fixed(pca.projections[k][0], 6), fixed(pca.projections[k][1], 6)});
  }
  auto write_pca_csv = [&](std::ostream& os) {
    os << "# variance_explained=" << fixed(pca.variance_explained, 6) << '\n';
    if (pca.rank_deficient) os << "# rank_deficient=true\n";
    pca_table.write_csv(os);
  };

  std::size_t min_r = 0, min_c = 1;
  for (std::size_t r = 0; r < cos.size(); ++r) {
    for (std::size_t c = r + 1; c < cos.size(); ++c) {
      if (cos.at(r, c) < cos.at(min_r, min_c)) min_r = r, min_c = c;
    }
  }

  if (!a.cosine_out.empty()) {
    std::ofstream f(a.cosine_out);
    prov_.write_comment(f);
    cos_table.write_csv(f);
    if (!f) fail(ErrorCode::kIo, "cannot write " + a.cosine_out);
  }
  if (!a.pca_out.empty()) {
    std::ofstream f(a.pca_out);
    prov_.write_comment(f);
    write_pca_csv(f);
    if (!f) fail(ErrorCode::kIo, "cannot write " + a.pca_out);
  }

  begin_report();
  if (format() == Format::kJson) {
    ojson j;
    j["provenance"] = ojson::parse(prov_.json());
    j["labels"] = cos.labels;
    j["cosine"] = ojson::array();
    for (std::size_t r = 0; r < cos.size(); ++r) {
      ojson row = ojson::array();
      for (std::size_t c = 0; c < cos.size(); ++c) row.push_back(cos.at(r, c));
      j["cosine"].push_back(row);
    }
    j["mean_off_diagonal"] = cos.mean_off_diagonal();
    j["pca"] = {{"variance_explained", pca.variance_explained}, {"rank_deficient", pca.rank_deficient}};
    j["pca"]["points"] = ojson::array();
    for (std::size_t k = 0; k < emotional.size(); ++k) {
      j["pca"]["points"].push_back(
          {{"label", emotional[k].source_label}, {"x", pca.projections[k][0]}, {"y", pca.projections[k][1]}});
    }
    out_ << j.dump(2) << '\n';
    return;
  }
  if (format() == Format::kCsv) {
    cos_table.write_csv(out_);
    out_ << '\n';
    write_pca_csv(out_);
    return;
  }
  out_ << fmt::format("profiles at layer {}: {} emotions, {} texts{}\n", a.layer, cos.size(), emotional.size(),
                      restrict ? fmt::format(", restricted to {} features", restrict->size()) : std::string());
  out_ << "cosine similarity\n";
  cos_table.write(out_);
  out_ << fmt::format("mean off-diagonal {}; most distinct pair {}-{} ({})\n", fixed(cos.mean_off_diagonal(), 4),
                      cos.labels[min_r], cos.labels[min_c], fixed(cos.at(min_r, min_c), 4));
  out_ << fmt::format("PCA variance explained {}{}\n", fixed(pca.variance_explained, 4),
                      pca.rank_deficient ? " (rank deficient)" : "");
  pca_table.write(out_);
}

void Cli::cmd_echo_build() {
  auto& a = echo_args_;
  auto snaps = input(a.snapshots, "experience container");
  const std::string sae_path = sae_path_for(a.layer, a.sae);
  input(sae_path, "SAE (--sae or --sae22)");
  auto sae = load_sae(sae_path);
  echo::EchoConfig config{g_.k, g_.alpha};
  config.validate(sae.n_features);
  auto vectors = load_vectors(snaps, a.layer, sae_path);
  auto echoes = echo::build_echoes(vectors, sae, config);

  tensorio::ContainerBuilder b;
  for (const auto& e : echoes) echo::add_echo(b, e);
  b.set_metadata("k", std::to_string(config.k))
      .set_metadata("alpha", format_exact(config.alpha))
      .set_metadata("layer", std::to_string(a.layer))
      .set_metadata("conditioning_set", std::to_string(vectors.size()));
  b.write_file(a.out);

  begin_report();
  if (format() == Format::kJson) {
    ojson j;
    j["provenance"] = ojson::parse(prov_.json());
    j["k"] = config.k;
    j["alpha"] = config.alpha;
    j["echoes"] = ojson::array();
    for (const auto& e : echoes) {
      std::vector<double> d(e.delta.begin(), e.delta.end());
      j["echoes"].push_back({{"source", e.source_memory}, {"delta_norm", l2(d)}, {"indices", e.source_indices}});
    }
    out_ << j.dump(2) << '\n';
    return;
  }
  TextTable t({"source", "k", "delta_norm", "top_features"});
  for (const auto& e : echoes) {
    std::vector<double> d(e.delta.begin(), e.delta.end());
    std::string top;
    for (std::size_t i = 0; i < std::min<std::size_t>(5, e.source_indices.size()); ++i) {
      top += (i ? " " : "") + std::to_string(e.source_indices[i]);
    }
    t.add({e.source_memory, std::to_string(e.source_indices.size()), fixed(l2(d), 6), top});
  }
  if (format() == Format::kCsv) {
    t.write_csv(out_);
    return;
  }
  out_ << fmt::format("built {} echoes (k={}, layer {}) -> {}\n", echoes.size(), config.k, a.layer, a.out);
  t.write(out_);
}

void Cli::cmd_ref_stats() {
  auto& a = ref_args_;
  auto path = input(a.snapshots, "reference container");
  const std::string sae_path = sae_path_for(a.layer, a.sae);
  input(sae_path, "SAE (--sae, --sae7 or --sae22)");
  if (a.set_store_norm && a.layer != kEmotionLayer) {
    throw UsageError("--set-store-norm needs emotion-layer (" + std::to_string(kEmotionLayer) + ") stats");
  }
  std::optional<memstore::MemoryStore> store;
  if (a.set_store_norm) store = open_store();

  auto sae = load_sae(sae_path);
  std::vector<ActivationSnapshot> snaps;
  for (auto& s : load_snapshots(path)) {
    if (s.layer == a.layer) snaps.push_back(std::move(s));
  }
  if (snaps.empty()) fail(ErrorCode::kNotFound, "no layer-" + std::to_string(a.layer) + " snapshots");
  auto ref = matching::compute_reference_stats(snaps, sae, a.label.empty() ? path.filename().string() : a.label);
  matching::reference_stats_to_container(ref).write_file(a.out);
  if (store) store->set_emotion_reference_norm(ref.mean_residual_norm);

  begin_report();
  if (format() == Format::kJson) {
    ojson j;
    j["provenance"] = ojson::parse(prov_.json());
    j["layer"] = ref.layer;
    j["corpus"] = ref.corpus_label;
    j["snapshots"] = snaps.size();
    j["mean_residual_norm"] = ref.mean_residual_norm;
    out_ << j.dump(2) << '\n';
    return;
  }
  if (format() == Format::kCsv) {
    out_ << "layer,corpus,snapshots,mean_residual_norm\n"
         << ref.layer << ',' << csv::quote(ref.corpus_label) << ',' << snaps.size() << ','
         << format_exact(ref.mean_residual_norm) << '\n';
    return;
  }
  out_ << fmt::format("reference stats: layer {}, {} snapshots, mean residual norm {} -> {}\n", ref.layer,
                      snaps.size(), format_exact(ref.mean_residual_norm), a.out);
  if (store) out_ << "store emotion-layer norm set\n";
}

void Cli::cmd_store_put() {
  auto& a = put_args_;
  auto ctx_path = input(a.context, "context container");
  auto emo_path = input(a.emotion, "emotion container");
  auto echo_path = input(a.echo, "echo container");
  auto sae7_path = input(g_.sae7, "--sae7");
  auto ref7_path = input(g_.ref7, "--ref7");
  if (!g_.sae22.empty()) input(g_.sae22, "--sae22");
  if (!g_.ref22.empty()) input(g_.ref22, "--ref22");
  auto store = open_store();

  auto sae7 = load_sae(sae7_path);
  auto ref7 = matching::load_reference_stats(ref7_path);
  auto ctx_snaps = load_snapshots(ctx_path);
  const auto& ctx = pick(ctx_snaps, a.context_label, store.context_layer(), "context");

  auto emo_vectors = load_vectors(emo_path, store.emotion_layer(), g_.sae22);
  const FeatureVector* emo = nullptr;
  for (const auto& v : emo_vectors) {
    if (a.emotion_label.empty() ? emo_vectors.size() == 1 : v.source_label == a.emotion_label) emo = &v;
  }
  if (!emo) {
    fail(ErrorCode::kNotFound, a.emotion_label.empty()
                                   ? "emotion container holds several vectors; pass --emotion-label"
                                   : "no emotion vector labelled '" + a.emotion_label + "'");
  }

  auto echoes = echo::echoes_from_container(tensorio::read_container_file(echo_path));
  const echo::EchoVector* chosen = nullptr;
  for (const auto& e : echoes) {
    if (e.source_memory == emo->source_label) chosen = &e;
  }
  if (!chosen && echoes.size() == 1) chosen = &echoes.front();
  if (!chosen) fail(ErrorCode::kNotFound, "no echo built from '" + emo->source_label + "'");

  std::int64_t created = a.created_at;
  if (created < 0) {
    created = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::system_clock::now().time_since_epoch())
                  .count();
  }
  std::optional<std::string> semantic;
  if (semantic_label_opt_->count()) semantic = a.semantic_label;
  auto memory = memstore::make_memory(a.id, ctx, sae7, ref7, *emo, *chosen, a.valence, semantic, g_.alpha, created);
  if (!store.emotion_reference_norm() && !g_.ref22.empty()) {
    store.set_emotion_reference_norm(matching::load_reference_stats(g_.ref22).mean_residual_norm);
  }
  store.put(memory);
  out_ << fmt::format("stored {} ({} context bits, {} echo features, alpha {})\n", memory.id,
                      memory.context_signature.popcount(), memory.echo.source_indices.size(),
                      format_exact(memory.default_alpha));
}

void Cli::cmd_store_get() {
  auto store = open_store();
  const auto& m = store.get(get_id_);
  std::vector<double> d(m.echo.delta.begin(), m.echo.delta.end());
  if (format() == Format::kJson) {
    ojson j;
    j["id"] = m.id;
    j["valence"] = m.valence_tag;
    j["semantic_label"] = m.semantic_label ? ojson(*m.semantic_label) : ojson(nullptr);
    j["created_at"] = m.created_at;
    j["default_alpha"] = m.default_alpha;
    j["context_bits"] = m.context_signature.set_indices();
    j["echo_indices"] = m.echo.source_indices;
    j["echo_norm"] = l2(d);
    out_ << j.dump(2) << '\n';
    return;
  }
  TextTable t({"field", "value"});
  t.add({"id", m.id});
  t.add({"valence", m.valence_tag});
  t.add({"semantic_label", m.semantic_label.value_or("")});
  t.add({"created_at", std::to_string(m.created_at)});
  t.add({"default_alpha", format_exact(m.default_alpha)});
  t.add({"context_bits", std::to_string(m.context_signature.popcount()) + "/" +
                             std::to_string(m.context_signature.size())});
  t.add({"echo_features", std::to_string(m.echo.source_indices.size())});
  t.add({"echo_norm", format_exact(l2(d))});
  if (format() == Format::kCsv) {
    t.write_csv(out_);
  } else {
    t.write(out_);
  }
}

void Cli::cmd_store_list() {
  auto store = open_store();
  if (format() == Format::kJson) {
    ojson j = ojson::array();
    for (const auto& m : store.memories()) {
      j.push_back({{"id", m.id},
                   {"valence", m.valence_tag},
                   {"semantic_label", m.semantic_label ? ojson(*m.semantic_label) : ojson(nullptr)},
                   {"default_alpha", m.default_alpha},
                   {"context_bits", m.context_signature.popcount()}});
    }
    out_ << j.dump(2) << '\n';
    return;
  }
  TextTable t({"id", "valence", "alpha", "context_bits", "semantic_label"});
  for (const auto& m : store.memories()) {
    t.add({m.id, m.valence_tag, format_exact(m.default_alpha), std::to_string(m.context_signature.popcount()),
           m.semantic_label.value_or("")});
  }
  if (format() == Format::kCsv) {
    t.write_csv(out_);
  } else {
    t.write(out_);
    out_ << store.size() << " memories\n";
  }
}

void Cli::cmd_store_export() {
  auto store = open_store();
  std::optional<double> alpha;
  if (set_on_command_line(export_alpha_opt_) || set_on_command_line(global_opts_.at("alpha"))) alpha = g_.alpha;
  const auto bytes = store.export_delta(export_args_.id, alpha);
  tensorio::write_file_atomic(export_args_.out, bytes);
  auto c = tensorio::read_container_bytes(bytes);
  std::vector<double> d(c.at("delta").values.begin(), c.at("delta").values.end());
  out_ << fmt::format("exported {} alpha {} layer {} norm {} -> {}\n", export_args_.id, c.metadata_or("alpha"),
                      c.metadata_or("layer"), fixed(l2(d), 6), export_args_.out);
}

void Cli::cmd_store_set_norm() {
  auto path = input(set_norm_ref_, "reference container");
  auto store = open_store();
  auto ref = matching::load_reference_stats(path);
  if (ref.layer != store.emotion_layer()) {
    fail(ErrorCode::kInvalidArgument, "reference stats are for layer " + std::to_string(ref.layer) +
                                          ", not the emotion layer " + std::to_string(store.emotion_layer()));
  }
  store.set_emotion_reference_norm(ref.mean_residual_norm);
  out_ << "emotion-layer mean residual norm " << format_exact(ref.mean_residual_norm) << '\n';
}

void Cli::cmd_recall(const std::string& query, const std::string& label, const std::string& delta_out) {
  auto qpath = input(query, "query container");
  auto sae7_path = input(g_.sae7, "--sae7");
  auto ref7_path = input(g_.ref7, "--ref7");
  auto store = open_store();
  prov_.add_input(store.root() / "index.json");
  auto sae7 = load_sae(sae7_path);
  auto ref7 = matching::load_reference_stats(ref7_path);
  auto snaps = load_snapshots(qpath);
  const auto& q = pick(snaps, label, store.context_layer(), "query");
  auto result = store.recall(q, sae7, ref7, g_.threshold);
  if (result.hit && !delta_out.empty()) {
    tensorio::write_file_atomic(delta_out, store.export_delta(result.hit->memory->id));
  }

  begin_report();
  const double best_score = result.match.ranked.empty() ? 0.0 : result.match.ranked.front().score;
  if (format() == Format::kJson) {
    ojson j;
    j["provenance"] = ojson::parse(prov_.json());
    j["threshold"] = g_.threshold;
    if (result.hit) {
      const auto& m = *result.hit->memory;
      j["matched"] = m.id;
      j["score"] = result.hit->score;
      j["valence"] = m.valence_tag;
      j["alpha"] = m.default_alpha;
      j["delta_norm"] = l2(result.hit->scaled_delta);
    } else {
      j["matched"] = nullptr;
      j["best_score"] = best_score;
    }
    out_ << j.dump(2) << '\n';
    return;
  }
  if (format() == Format::kCsv) {
    out_ << "matched,score,valence,alpha,delta_norm\n";
    if (result.hit) {
      const auto& m = *result.hit->memory;
      out_ << csv::quote(m.id) << ',' << fixed(result.hit->score, 6) << ',' << csv::quote(m.valence_tag) << ','
           << format_exact(m.default_alpha) << ',' << fixed(l2(result.hit->scaled_delta), 6) << '\n';
    }
    return;
  }
  if (result.hit) {
    const auto& m = *result.hit->memory;
    out_ << fmt::format("matched {} score {} valence {} alpha {} delta_norm {}\n", m.id, fixed(result.hit->score, 3),
                        m.valence_tag, format_exact(m.default_alpha), fixed(l2(result.hit->scaled_delta), 6));
    if (m.semantic_label) out_ << "semantic_label " << *m.semantic_label << '\n';
  } else {
    out_ << fmt::format("no match: best score {} below threshold {}\n", fixed(best_score, 3), fixed(g_.threshold, 3));
  }
}

void Cli::cmd_match() {
  auto qpath = input(match_args_.query, "query container");
  auto sae7_path = input(g_.sae7, "--sae7");
  auto ref7_path = input(g_.ref7, "--ref7");
  auto store = open_store();
  prov_.add_input(store.root() / "index.json");
  auto sae7 = load_sae(sae7_path);
  auto ref7 = matching::load_reference_stats(ref7_path);
  auto snaps = load_snapshots(qpath);
  const auto& q = pick(snaps, match_args_.label, store.context_layer(), "query");
  if (q.layer != ref7.layer) fail(ErrorCode::kInvalidArgument, "query and reference stats are from different layers");
  auto sig = matching::binarize(sae::encode(q, sae7), ref7);
  auto result = store.match(sig, g_.threshold);

  begin_report();
  if (format() == Format::kJson) {
    ojson j;
    j["provenance"] = ojson::parse(prov_.json());
    j["threshold"] = g_.threshold;
    j["ranked"] = ojson::array();
    for (const auto& c : result.ranked) j["ranked"].push_back({{"id", c.id}, {"score", c.score}, {"matched", c.matched}});
    out_ << j.dump(2) << '\n';
    return;
  }
  out_ << "id,score,matched\n";
  for (const auto& c : result.ranked) {
    out_ << csv::quote(c.id) << ',' << fixed(c.score, 6) << ',' << (c.matched ? "true" : "false") << '\n';
  }
}

void Cli::cmd_ratings() {
  auto& a = ratings_args_;
  auto path = input(a.path, "ratings CSV");
  auto coding = stats::SimilarityCoding::parse(a.coding);
  auto records = stats::parse_ratings(csv::read_file(path));
  prov_.seed = g_.seed;

  std::map<stats::SimilarityLevel, std::map<stats::Condition, stats::ConditionMean>> means;
  for (auto level : stats::kAllLevels) means[level] = stats::condition_means(records, level);
  std::map<stats::Condition, std::optional<double>> slopes;
  for (auto c : kReportOrder) {
    try {
      slopes[c] = stats::ols_slope(records, c, coding);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
      slopes[c] = std::nullopt;
    }
  }
  stats::PermutationOptions opt;
  opt.iterations = a.iterations;
  opt.seed = g_.seed;
  opt.sidedness = a.two_sided ? stats::Sidedness::kTwoSided : stats::Sidedness::kGreater;
  opt.unit = a.unit == "scenario" ? stats::PermutationUnit::kScenario : stats::PermutationUnit::kResponse;
  opt.coding = coding;
  opt.workers = a.workers;
  std::map<stats::Condition, stats::PermutationResult> tests;
  for (auto c : {stats::Condition::kC, stats::Condition::kB, stats::Condition::kBC}) {
    if (slopes[c] && slopes[stats::Condition::kA]) {
      tests[c] = stats::permutation_test_slope_diff(records, stats::Condition::kA, c, opt);
    }
  }
  const std::string test_desc =
      fmt::format("{} iterations, seed {}, {}, {} units, stratified by similarity level", opt.iterations, opt.seed,
                  a.two_sided ? "two-sided" : "one-sided greater", a.unit);

  if (format() == Format::kJson) {
    ojson j;
    j["provenance"] = ojson::parse(prov_.json());
    j["coding"] = coding.values;
    j["means"] = ojson::array();
    for (auto level : stats::kAllLevels) {
      for (auto c : kReportOrder) {
        const auto& m = means[level][c];
        j["means"].push_back({{"level", stats::to_string(level)},
                              {"condition", stats::to_string(c)},
                              {"n", m.n},
                              {"threat", m.n ? ojson(m.threat) : ojson(nullptr)},
                              {"warmth", m.n ? ojson(m.warmth) : ojson(nullptr)}});
      }
    }
    j["permutation"] = {{"iterations", opt.iterations},
                        {"seed", opt.seed},
                        {"sidedness", a.two_sided ? "two-sided" : "greater"},
                        {"unit", a.unit}};
    j["slopes"] = ojson::array();
    for (auto c : kReportOrder) {
      ojson s{{"condition", stats::to_string(c)}, {"slope", slopes[c] ? ojson(*slopes[c]) : ojson(nullptr)}};
      if (tests.count(c)) {
        s["diff_vs_A"] = tests[c].observed_diff;
        s["p_value"] = tests[c].p_value;
      }
      j["slopes"].push_back(s);
    }
    out_ << j.dump(2) << '\n';
    return;
  }

  TextTable mt({"level", "condition", "n", "threat", "warmth"});
  for (auto level : stats::kAllLevels) {
    for (auto c : kReportOrder) {
      const auto& m = means[level][c];
      mt.add({std::string(stats::to_string(level)), std::string(stats::to_string(c)), std::to_string(m.n),
              m.n ? fixed(m.threat, 2) : "n/a", m.n ? fixed(m.warmth, 2) : "n/a"});
    }
  }
  TextTable st({"condition", "slope", "diff_vs_A", "p_value"});
  for (auto c : kReportOrder) {
    const bool tested = tests.count(c) > 0;
    st.add({std::string(stats::to_string(c)), slopes[c] ? fixed(*slopes[c], 3) : "n/a",
            tested ? signed_fixed(tests[c].observed_diff, 3) : "", tested ? fixed(tests[c].p_value, 4) : ""});
  }
  begin_report();
  if (format() == Format::kCsv) {
    out_ << "# permutation: " << test_desc << '\n';
    mt.write_csv(out_);
    out_ << '\n';
    st.write_csv(out_);
    return;
  }
  out_ << "condition means by similarity level\n";
  mt.write(out_);
  out_ << "\ngradient slopes (threat on coded similarity " << a.coding << ")\n";
  st.write(out_);
  out_ << "permutation test: " << test_desc << '\n';
}

void Cli::cmd_decisions() {
  auto& a = decisions_args_;
  auto path = input(a.path, "decisions CSV");
  auto records = stats::parse_decisions(csv::read_file(path));
  const auto variance = a.unpooled ? stats::Variance::kUnpooled : stats::Variance::kPooled;
  auto table = stats::proportion_table(records);
  auto comparisons = stats::standard_comparisons(table, variance);
  auto sweep = stats::alpha_sweep(records);
  auto cell = [](const auto& m, const auto& key) {
    auto it = m.find(key);
    return it == m.end() ? stats::ProportionCell{} : it->second;
  };

  if (format() == Format::kJson) {
    ojson j;
    j["provenance"] = ojson::parse(prov_.json());
    auto cell_json = [](const stats::ProportionCell& c) {
      return ojson{{"good", c.good},
                   {"bad", c.bad},
                   {"invalid", c.invalid},
                   {"percent_good", c.valid() ? ojson(c.percent_good()) : ojson(nullptr)}};
    };
    j["proportions"] = ojson::array();
    for (auto c : kReportOrder) {
      j["proportions"].push_back({{"condition", stats::to_string(c)},
                                  {"blue_first", cell_json(cell(table.by_ordering, std::pair{c, stats::Ordering::kBlueFirst}))},
                                  {"red_first", cell_json(cell(table.by_ordering, std::pair{c, stats::Ordering::kRedFirst}))},
                                  {"overall", cell_json(cell(table.by_condition, c))}});
    }
    j["invalid_total"] = table.invalid_total;
    j["variance"] = a.unpooled ? "unpooled" : "pooled";
    j["z"] = ojson::array();
    for (const auto& z : comparisons) {
      j["z"].push_back({{"first", stats::to_string(z.first)},
                        {"second", stats::to_string(z.second)},
                        {"z", z.defined ? ojson(z.z) : ojson(nullptr)}});
    }
    if (!sweep.empty()) {
      j["alpha_sweep"] = ojson::array();
      for (const auto& [alpha, by_cond] : sweep) {
        ojson row{{"alpha", alpha}};
        for (const auto& [c, pc] : by_cond) row[std::string(stats::to_string(c))] = cell_json(pc);
        j["alpha_sweep"].push_back(row);
      }
    }
    out_ << j.dump(2) << '\n';
    return;
  }

  TextTable pt({"condition", "blue_first", "red_first", "overall", "invalid"});
  for (auto c : kReportOrder) {
    const auto overall = cell(table.by_condition, c);
    pt.add({std::string(stats::to_string(c)), pct(cell(table.by_ordering, std::pair{c, stats::Ordering::kBlueFirst})),
            pct(cell(table.by_ordering, std::pair{c, stats::Ordering::kRedFirst})), pct(overall),
            std::to_string(overall.invalid)});
  }
  TextTable zt({"comparison", "z"});
  for (const auto& z : comparisons) {
    zt.add({fmt::format("{} vs {}", stats::to_string(z.first), stats::to_string(z.second)),
            z.defined ? signed_fixed(z.z, 2) : "undefined"});
  }
  std::vector<stats::Condition> sweep_conditions;
  for (auto c : kReportOrder) {
    for (const auto& [alpha, by_cond] : sweep) {
      if (by_cond.count(c) &&
          std::find(sweep_conditions.begin(), sweep_conditions.end(), c) == sweep_conditions.end()) {
        sweep_conditions.push_back(c);
      }
    }
  }
  TextTable at([&] {
    std::vector<std::string> h{"alpha"};
    for (auto c : sweep_conditions) h.emplace_back(stats::to_string(c));
    return h;
  }());
  for (const auto& [alpha, by_cond] : sweep) {
    std::vector<std::string> row{fixed(alpha, 2)};
    for (auto c : sweep_conditions) row.push_back(pct(cell(by_cond, c)));
    at.add(std::move(row));
  }

  begin_report();
  if (format() == Format::kCsv) {
    out_ << "condition,ordering,good,bad,invalid,percent_good\n";
    for (auto c : kReportOrder) {
      for (auto [name, o] : {std::pair{"blue_first", stats::Ordering::kBlueFirst}, {"red_first", stats::Ordering::kRedFirst}}) {
        const auto pc = cell(table.by_ordering, std::pair{c, o});
        out_ << stats::to_string(c) << ',' << name << ',' << pc.good << ',' << pc.bad << ',' << pc.invalid << ','
             << (pc.valid() ? fixed(pc.percent_good(), 4) : "") << '\n';
      }
    }
    out_ << "\ncomparison,z\n";
    for (const auto& z : comparisons) {
      out_ << stats::to_string(z.first) << " vs " << stats::to_string(z.second) << ','
           << (z.defined ? fixed(z.z, 6) : "") << '\n';
    }
    if (!sweep.empty()) {
      out_ << '\n';
      at.write_csv(out_);
    }
    return;
  }
  out_ << "good-choice proportions (invalid responses excluded)\n";
  pt.write(out_);
  out_ << "\ntwo-proportion z-tests (" << (a.unpooled ? "unpooled" : "pooled") << " variance)\n";
  for (const auto& z : comparisons) {
    out_ << fmt::format("{} vs {} z={}\n", stats::to_string(z.first), stats::to_string(z.second),
                        z.defined ? signed_fixed(z.z, 2) : "undefined");
  }
  if (!sweep.empty()) {
    out_ << "\nalpha sweep (good choices among valid responses)\n";
    at.write(out_);
  }
}

void Cli::dispatch() {
  if (discover_->parsed()) return cmd_discover();
  if (echo_build_->parsed()) return cmd_echo_build();
  if (ref_stats_->parsed()) return cmd_ref_stats();
  if (store_put_->parsed()) return cmd_store_put();
  if (store_get_->parsed()) return cmd_store_get();
  if (store_list_->parsed()) return cmd_store_list();
  if (store_export_->parsed()) return cmd_store_export();
  if (store_set_norm_->parsed()) return cmd_store_set_norm();
  if (store_recall_->parsed()) {
    return cmd_recall(store_recall_args_.query, store_recall_args_.label, store_recall_args_.delta_out);
  }
  if (recall_->parsed()) return cmd_recall(recall_args_.query, recall_args_.label, recall_args_.delta_out);
  if (match_->parsed()) return cmd_match();
  if (geometry_->parsed()) return cmd_geometry();
  if (ratings_->parsed()) return cmd_ratings();
  if (decisions_->parsed()) return cmd_decisions();
  throw UsageError("no command given");
}

int Cli::run(std::span<const std::string> args) {
  define();
  export_alpha_opt_ = store_export_->get_option("--alpha");
  if (args.empty()) {
    err_ << app_.help();
    return kExitUsage;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app_.parse(reversed);
  } catch (const CLI::Success& e) {
    // --help / --version
    app_.exit(e, out_, err_);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err_ << "error: " << e.what() << "\n\n" << app_.help();
    return kExitUsage;
  }
  try {
    apply_config();
    dispatch();
  } catch (const UsageError& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(args);
}

}  // namespace emem::cli
