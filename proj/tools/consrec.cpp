// consrec: prepare, train, evaluate, export-embeddings, profile.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "consrec/checkpoint.hpp"
#include "consrec/consrec.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace consrec;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

DataFormat parse_format(const std::string& s) {
  if (s == "canonical") return DataFormat::canonical;
  if (s == "agree") return DataFormat::agree;
  throw ConfigError("unknown format '" + s + "' (expected canonical or agree)");
}

std::vector<std::size_t> parse_list(const std::string& s, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad ") + what + " '" + s + "'");
    }
  }
  return out;
}

// Everything a run needs; the JSON form is what gets persisted.
struct RunConfig {
  std::string data;
  std::string format = "canonical";
  std::string output;
  TrainConfig train;
  std::vector<std::size_t> ks{5, 10};
  std::size_t n_neg_eval = 100;

  json to_json() const {
    json j;
    j["data"] = data;
    j["format"] = format;
    j["output"] = output;
    j["dim"] = train.dim;
    j["layers"] = train.layers;
    j["n_neg_train"] = train.n_neg_train;
    j["lr"] = train.lr;
    j["adam_beta1"] = train.adam_beta1;
    j["adam_beta2"] = train.adam_beta2;
    j["adam_eps"] = train.adam_eps;
    j["epochs"] = train.epochs;
    j["seed"] = train.seed;
    j["eval_every"] = train.eval_every;
    j["patience"] = train.patience;
    j["group_self_loops"] = train.group_self_loops;
    j["views_enabled"] = {{"member", train.views_enabled[0]},
                          {"item", train.views_enabled[1]},
                          {"group", train.views_enabled[2]}};
    j["ks"] = ks;
    j["n_neg_eval"] = n_neg_eval;
    return j;
  }

  // Returns true when the document set a seed.
  bool merge(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    bool seeded = false;
    for (const auto& [key, value] : j.items()) {
      try {
        if (key == "data") data = value.get<std::string>();
        else if (key == "format") format = value.get<std::string>();
        else if (key == "output") output = value.get<std::string>();
        else if (key == "dim") train.dim = value.get<std::size_t>();
        else if (key == "layers") train.layers = value.get<std::size_t>();
        else if (key == "n_neg_train") train.n_neg_train = value.get<std::size_t>();
        else if (key == "lr") train.lr = value.get<double>();
        else if (key == "adam_beta1") train.adam_beta1 = value.get<double>();
        else if (key == "adam_beta2") train.adam_beta2 = value.get<double>();
        else if (key == "adam_eps") train.adam_eps = value.get<double>();
        else if (key == "epochs") train.epochs = value.get<std::size_t>();
        else if (key == "seed") { train.seed = value.get<std::uint64_t>(); seeded = true; }
        else if (key == "eval_every") train.eval_every = value.get<std::size_t>();
        else if (key == "patience") train.patience = value.get<std::size_t>();
        else if (key == "group_self_loops") train.group_self_loops = value.get<bool>();
        else if (key == "views_enabled") {
          train.views_enabled = {value.value("member", true), value.value("item", true), value.value("group", true)};
        } else if (key == "ks") ks = value.get<std::vector<std::size_t>>();
        else if (key == "n_neg_eval") n_neg_eval = value.get<std::size_t>();
        else throw ConfigError("unknown config key '" + key + "'");
      } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
      }
    }
    return seeded;
  }

  void validate() const {
    train.validate();
    parse_format(format);
    if (ks.empty()) throw ConfigError("invalid config: ks must be non-empty");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] < 1 || (i > 0 && ks[i] <= ks[i - 1])) throw ConfigError("invalid config: ks must be ascending and >= 1");
    }
    if (n_neg_eval < 1) throw ConfigError("invalid config: n_neg_eval must be >= 1");
  }
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("CONSREC_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("CONSREC_SEED is not an unsigned integer: ") + s);
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::string summary(const InteractionDataset& d) {
  std::ostringstream os;
  os << "users=" << d.num_users() << " items=" << d.num_items() << " groups=" << d.num_groups()
     << " group_interactions=" << d.group_interaction_count()
     << " user_interactions=" << d.user_interaction_count();
  return os.str();
}

// Queries of both tasks for the held-out items, in group-then-user order.
std::vector<EvalQuery> all_queries(const SplitDataset& s, std::size_t n_neg, std::uint64_t seed) {
  Rng rng = make_stream(seed, RngPurpose::eval_negatives);
  auto out = build_eval_queries(s, EntityKind::group, n_neg, rng);
  auto users = build_eval_queries(s, EntityKind::user, n_neg, rng);
  out.insert(out.end(), users.begin(), users.end());
  return out;
}

void check_shapes(const CheckpointMeta& m, const InteractionDataset& d) {
  if (m.num_users != d.num_users() || m.num_items != d.num_items() || m.num_groups != d.num_groups()) {
    std::ostringstream os;
    os << "checkpoint was trained on " << m.num_users << " users, " << m.num_items << " items, " << m.num_groups
       << " groups; dataset has " << d.num_users() << ", " << d.num_items() << ", " << d.num_groups();
    throw DataError(os.str());
  }
}

json metrics_record(const EpochRecord& rec) {
  json j;
  j["epoch"] = rec.epoch;
  j["loss_group"] = rec.loss_group;
  j["loss_user"] = rec.loss_user;
  j["seconds"] = rec.seconds;
  return j;
}

// ---- prepare ---------------------------------------------------------------

struct PrepareArgs {
  std::string input, output, format = "canonical";
  std::size_t min_members = 2, min_group_items = 3;
  bool no_filter = false;
  bool dump_views = false;
};

int cmd_prepare(const PrepareArgs& a) {
  const auto raw = load_dataset(a.input, parse_format(a.format));
  const auto d = a.no_filter ? raw : apply_filters(raw, a.min_members, a.min_group_items);
  write_prepared(d, a.output);
  if (a.dump_views) dump_views(build_views(d), a.output);
  std::cout << summary(d) << '\n';
  return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::optional<std::string> data, format, output, ks, disable;
  std::optional<std::size_t> dim, layers, n_neg_train, epochs, eval_every, patience, n_neg_eval;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  bool no_self_loops = false;
};

RunConfig resolve(const TrainArgs& a) {
  RunConfig rc;
  bool seeded = false;
  if (!a.config.empty()) seeded = rc.merge(read_json(a.config));
  if (a.data) rc.data = *a.data;
  if (a.format) rc.format = *a.format;
  if (a.output) rc.output = *a.output;
  if (a.dim) rc.train.dim = *a.dim;
  if (a.layers) rc.train.layers = *a.layers;
  if (a.n_neg_train) rc.train.n_neg_train = *a.n_neg_train;
  if (a.epochs) rc.train.epochs = *a.epochs;
  if (a.eval_every) rc.train.eval_every = *a.eval_every;
  if (a.patience) rc.train.patience = *a.patience;
  if (a.n_neg_eval) rc.n_neg_eval = *a.n_neg_eval;
  if (a.lr) rc.train.lr = *a.lr;
  if (a.ks) rc.ks = parse_list(*a.ks, "--k list");
  if (a.no_self_loops) rc.train.group_self_loops = false;
  if (a.disable) {
    std::stringstream in(*a.disable);
    std::string v;
    while (std::getline(in, v, ',')) {
      if (v == "member") rc.train.views_enabled[0] = false;
      else if (v == "item") rc.train.views_enabled[1] = false;
      else if (v == "group") rc.train.views_enabled[2] = false;
      else throw ConfigError("unknown view '" + v + "'");
    }
  }
  if (a.seed) {
    rc.train.seed = *a.seed;
  } else if (!seeded) {
    if (auto s = env_seed()) rc.train.seed = *s;
  }
  if (rc.data.empty()) throw ConfigError("no data directory (set \"data\" or --data)");
  if (rc.output.empty()) throw ConfigError("no output directory (set \"output\" or --output)");
  rc.validate();
  return rc;
}

int cmd_train(const TrainArgs& a) {
  const RunConfig rc = resolve(a);
  const fs::path out_dir = rc.output;
  fs::create_directories(out_dir);
  open_out(out_dir / "effective_config.json") << rc.to_json().dump(2) << '\n';

  const auto d = load_dataset(rc.data, parse_format(rc.format));
  const auto split = split_leave_one_out(d, rc.train.seed);
  std::vector<EvalQuery> validation;
  if (rc.train.eval_every > 0) validation = all_queries(split, rc.n_neg_eval, rc.train.seed);

  auto log = open_out(out_dir / "train_log.jsonl");
  const auto result = train(split, rc.train, validation, [&](const EpochRecord& rec) {
    log << metrics_record(rec).dump() << '\n';
    for (const auto& r : rec.validation) {
      std::ostringstream lines;
      write_metrics_jsonl(lines, r);
      std::string line;
      std::istringstream in(lines.str());
      while (std::getline(in, line)) log << "{\"epoch\":" << rec.epoch << "," << line.substr(1) << '\n';
    }
    log.flush();
  });
  const auto& t = split.train;
  save_checkpoint(result.params,
                  {rc.train.dim, rc.train.layers, t.num_users(), t.num_items(), t.num_groups(), rc.train.seed},
                  out_dir / "checkpoint");
  const auto& last = result.log.back();
  std::cout << "trained " << result.log.size() << " epochs; loss_group=" << last.loss_group
            << " loss_user=" << last.loss_user << "; checkpoint at " << (out_dir / "checkpoint").string() << '\n';
  return kOk;
}

// ---- evaluate --------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, data, format = "canonical", ks = "5,10", task = "both", output;
  std::optional<std::string> baseline;
  std::optional<std::uint64_t> seed;
  std::size_t n_neg_eval = 100;
};

// Seed recorded by training unless overridden; it fixes the split.
std::uint64_t seed_for(const std::optional<std::uint64_t>& flag, const Checkpoint& ck) {
  return flag ? *flag : ck.meta.seed;
}

int cmd_evaluate(const EvalArgs& a) {
  const auto ks = parse_list(a.ks, "--k list");
  if (ks.empty() || std::any_of(ks.begin(), ks.end(), [](std::size_t k) { return k == 0; })) {
    throw ConfigError("--k needs positive values");
  }
  std::vector<EntityKind> tasks;
  if (a.task == "group" || a.task == "both") tasks.push_back(EntityKind::group);
  if (a.task == "user" || a.task == "both") tasks.push_back(EntityKind::user);
  if (tasks.empty()) throw ConfigError("--task must be group, user or both");
  if (a.baseline && *a.baseline != "popularity") throw ConfigError("unknown baseline '" + *a.baseline + "'");

  const auto ck = load_checkpoint(a.checkpoint);
  const std::uint64_t seed = seed_for(a.seed, ck);
  const auto d = load_dataset(a.data, parse_format(a.format));
  const auto split = split_leave_one_out(d, seed);
  check_shapes(ck.meta, split.train);
  const auto queries = all_queries(split, a.n_neg_eval, seed);
  const ModelConfig mcfg{ck.meta.dim, ck.meta.layers, {true, true, true}};
  const auto outputs = compute_forward(build_views(split.train), ck.params, mcfg);

  std::ofstream file;
  if (!a.output.empty()) file = open_out(a.output);
  std::ostream& out = a.output.empty() ? std::cout : file;
  for (auto task : tasks) {
    write_metrics_jsonl(out, evaluate(ck.params, outputs, queries, task, ks));
    if (a.baseline) write_metrics_jsonl(out, popularity_baseline(split.train, queries, task, ks));
  }
  return kOk;
}

// ---- export-embeddings -----------------------------------------------------

struct ExportArgs {
  std::string checkpoint, table, output, svg, dims, data, format = "canonical";
};

void write_svg(const fs::path& path, const Matrix& m, std::size_t a, std::size_t b,
               const std::vector<std::string>& ids) {
  const double size = 640.0, pad = 40.0;
  double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (r == 0) {
      lo_x = hi_x = m(r, a);
      lo_y = hi_y = m(r, b);
    }
    lo_x = std::min(lo_x, m(r, a));
    hi_x = std::max(hi_x, m(r, a));
    lo_y = std::min(lo_y, m(r, b));
    hi_y = std::max(hi_y, m(r, b));
  }
  const double sx = hi_x > lo_x ? (size - 2 * pad) / (hi_x - lo_x) : 0.0;
  const double sy = hi_y > lo_y ? (size - 2 * pad) / (hi_y - lo_y) : 0.0;
  auto out = open_out(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << pad << "\" y=\"20\" font-size=\"12\">dim " << a << " vs dim " << b << "</text>\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double x = pad + (m(r, a) - lo_x) * sx;
    const double y = size - pad - (m(r, b) - lo_y) * sy;
    out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"steelblue\"/>";
    out << "<text x=\"" << x + 4 << "\" y=\"" << y - 4 << "\" font-size=\"8\">" << ids[r] << "</text>\n";
  }
  out << "</svg>\n";
}

int cmd_export(const ExportArgs& a) {
  std::optional<std::pair<std::size_t, std::size_t>> dims;
  if (!a.svg.empty()) {
    const auto v = parse_list(a.dims.empty() ? "0,1" : a.dims, "--dims");
    if (v.size() != 2) throw ConfigError("--dims takes two indices a,b");
    dims = {v[0], v[1]};
  }
  const auto ck = load_checkpoint(a.checkpoint);
  const Matrix* table = nullptr;
  EntityKind kind = EntityKind::group;
  if (a.table == "items") {
    table = &ck.params.items;
  } else if (a.table == "groups") {
    table = &ck.params.groups;
  } else if (a.table == "users") {
    table = &ck.params.users;
    kind = EntityKind::user;
  } else {
    throw ConfigError("unknown table '" + a.table + "' (expected items, groups or users)");
  }
  const std::size_t d = table->cols();
  if (dims && (dims->first >= d || dims->second >= d)) {
    throw ConfigError("--dims out of range for d=" + std::to_string(d));
  }

  // External ids when the prepared data is given, dense indices otherwise.
  std::vector<std::string> ids(table->rows());
  for (std::size_t r = 0; r < ids.size(); ++r) ids[r] = std::to_string(r);
  if (!a.data.empty()) {
    const auto ds = load_dataset(a.data, parse_format(a.format));
    check_shapes(ck.meta, ds);
    const IdMap& map = a.table == "items" ? ds.items : kind == EntityKind::user ? ds.users : ds.groups;
    ids = map.externals();
  }

  auto out = open_out(a.output);
  out << "id";
  for (std::size_t c = 0; c < d; ++c) out << ",d" << c;
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < table->rows(); ++r) {
    out << ids[r];
    for (std::size_t c = 0; c < d; ++c) out << ',' << (*table)(r, c);
    out << '\n';
  }
  if (dims) write_svg(a.svg, *table, dims->first, dims->second, ids);
  return kOk;
}

// ---- profile ---------------------------------------------------------------

struct ProfileArgs {
  std::string checkpoint, data, format = "canonical", multipliers = "1,2,4,6,8,10";
  std::optional<std::uint64_t> seed;
  std::size_t repeats = 3, n_neg_eval = 100, train_epochs = 0;
};

int cmd_profile(const ProfileArgs& a) {
  const auto ck = load_checkpoint(a.checkpoint);
  const std::uint64_t seed = seed_for(a.seed, ck);
  const auto d = load_dataset(a.data, parse_format(a.format));
  const auto split = split_leave_one_out(d, seed);
  check_shapes(ck.meta, split.train);
  const auto queries = all_queries(split, a.n_neg_eval, seed);
  const ModelConfig mcfg{ck.meta.dim, ck.meta.layers, {true, true, true}};
  const auto views = build_views(split.train);
  auto prof = efficiency_profile(views, ck.params, mcfg, queries, parse_list(a.multipliers, "--multipliers"),
                                 a.repeats);
  if (a.train_epochs > 0) {
    TrainConfig tc;
    tc.dim = ck.meta.dim;
    tc.layers = ck.meta.layers;
    tc.epochs = a.train_epochs;
    tc.seed = seed;
    const auto r = train(split, tc);
    for (const auto& rec : r.log) prof.train_seconds += rec.seconds;
  }

  json j;
  j["n_queries_base"] = queries.size();
  j["train_epochs"] = a.train_epochs;
  j["train_seconds"] = prof.train_seconds;
  j["forward_seconds"] = prof.forward_seconds;
  j["forward_propagation_passes"] = prof.forward_propagation_passes;
  j["scaling"] = json::array();
  for (const auto& pt : prof.scaling) {
    j["scaling"].push_back(
        {{"n_queries", pt.n_queries}, {"seconds", pt.seconds}, {"propagation_passes", pt.propagation_passes}});
  }
  j["seconds_per_query"] = prof.slope;
  j["r_squared"] = prof.r_squared;
  std::cout << j.dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ConsRec group recommender"};
  app.require_subcommand(1);

  PrepareArgs pa;
  auto* prep = app.add_subcommand("prepare", "Load, filter and write a canonical dataset");
  prep->add_option("--input", pa.input, "Input directory")->required();
  prep->add_option("--output", pa.output, "Output directory")->required();
  prep->add_option("--format", pa.format, "canonical or agree");
  prep->add_option("--min-members", pa.min_members, "Minimum group size");
  prep->add_option("--min-group-items", pa.min_group_items, "Minimum group interactions");
  prep->add_flag("--no-filter", pa.no_filter, "Skip the group filters");
  prep->add_flag("--dump-views", pa.dump_views, "Also write the three view edge lists");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Train a model; writes checkpoint/, train_log.jsonl, effective_config.json");
  tr->add_option("--config", ta.config, "JSON config file");
  tr->add_option("--data", ta.data, "Prepared data directory");
  tr->add_option("--format", ta.format, "canonical or agree");
  tr->add_option("--output", ta.output, "Output directory");
  tr->add_option("--dim", ta.dim, "Embedding dimension");
  tr->add_option("--layers", ta.layers, "Propagation layers");
  tr->add_option("--neg", ta.n_neg_train, "Training negatives per positive");
  tr->add_option("--lr", ta.lr, "Adam learning rate");
  tr->add_option("--epochs", ta.epochs, "Epoch budget");
  tr->add_option("--seed", ta.seed, "Seed (default: config, then CONSREC_SEED, then 0)");
  tr->add_option("--eval-every", ta.eval_every, "Epochs between validation passes (0: none)");
  tr->add_option("--patience", ta.patience, "Early-stop patience on group HR@10 (0: off)");
  tr->add_option("--n-neg-eval", ta.n_neg_eval, "Negatives per validation query");
  tr->add_option("--k", ta.ks, "Cutoffs, e.g. 5,10");
  tr->add_option("--disable-views", ta.disable, "Comma list of views to switch off: member,item,group");
  tr->add_flag("--no-group-self-loops", ta.no_self_loops, "Drop self-loops from the group view");

  EvalArgs ea;
  auto* ev = app.add_subcommand("evaluate", "Score held-out queries; writes metrics JSONL");
  ev->add_option("--checkpoint", ea.checkpoint, "Checkpoint directory")->required();
  ev->add_option("--data", ea.data, "Prepared data directory")->required();
  ev->add_option("--format", ea.format, "canonical or agree");
  ev->add_option("--k", ea.ks, "Cutoffs, e.g. 5,10");
  ev->add_option("--task", ea.task, "group, user or both");
  ev->add_option("--baseline", ea.baseline, "Also report a baseline (popularity)");
  ev->add_option("--seed", ea.seed, "Split seed (default: the training seed)");
  ev->add_option("--n-neg-eval", ea.n_neg_eval, "Negatives per query");
  ev->add_option("--output", ea.output, "Metrics file (default: stdout)");

  ExportArgs xa;
  auto* ex = app.add_subcommand("export-embeddings", "Write an embedding table as CSV, optionally an SVG scatter");
  ex->add_option("--checkpoint", xa.checkpoint, "Checkpoint directory")->required();
  ex->add_option("--table", xa.table, "items, groups or users")->required();
  ex->add_option("--output", xa.output, "CSV path")->required();
  ex->add_option("--svg", xa.svg, "SVG path");
  ex->add_option("--dims", xa.dims, "Two dimensions for the scatter, e.g. 0,1");
  ex->add_option("--data", xa.data, "Prepared data directory for external ids");
  ex->add_option("--format", xa.format, "canonical or agree");

  ProfileArgs fa;
  auto* pr = app.add_subcommand("profile", "Time forward pass and scoring at growing query counts");
  pr->add_option("--checkpoint", fa.checkpoint, "Checkpoint directory")->required();
  pr->add_option("--data", fa.data, "Prepared data directory")->required();
  pr->add_option("--format", fa.format, "canonical or agree");
  pr->add_option("--seed", fa.seed, "Split seed (default: the training seed)");
  pr->add_option("--multipliers", fa.multipliers, "Query-count multipliers");
  pr->add_option("--repeats", fa.repeats, "Timing repeats per size (minimum kept)");
  pr->add_option("--n-neg-eval", fa.n_neg_eval, "Negatives per query");
  pr->add_option("--train-epochs", fa.train_epochs, "Also time this many training epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*prep) return cmd_prepare(pa);
    if (*tr) return cmd_train(ta);
    if (*ev) return cmd_evaluate(ea);
    if (*ex) return cmd_export(xa);
    if (*pr) return cmd_profile(fa);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
