// Copyright 2026 The prefrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// prefrank command-line tool: prepare / train / evaluate / recommend / grid.
// Exit codes: 0 success, 2 usage or config error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "prefrank/prefrank.hpp"

namespace fs = std::filesystem;
namespace pf = prefrank;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> threads;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file (key = value lines)");
  cmd->add_option("--set", args.sets, "override a config key, e.g. --set lr=5e-4 (repeatable)")
      ->allow_extra_args(false);
  cmd->add_option("--seed", args.seed, "override the seed");
  cmd->add_option("--threads", args.threads,
                  "worker threads (fallback: PREFRANK_THREADS env var)");
}

pf::RunConfig resolve_config(const CommonArgs& args) {
  pf::RunConfig rc;
  if (!args.config_path.empty()) rc = pf::load_run_config(args.config_path);
  for (const std::string& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw pf::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    rc.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) rc.seed = *args.seed;
  if (args.threads) {
    rc.threads = *args.threads;
  } else if (const char* env = std::getenv("PREFRANK_THREADS")) {
    rc.threads = pf::detail::to_int64("PREFRANK_THREADS", env);
  }
  return rc;
}

int run_prepare(const pf::RunConfig& rc) {
  rc.validate();
  if (rc.raw_path.empty()) throw pf::ConfigError("prepare: raw_path is required");
  if (rc.corpus.empty()) throw pf::ConfigError("prepare: corpus output path is required");
  const fs::path out(rc.corpus);
  pf::DirLock lock(out.has_parent_path() ? out.parent_path() : fs::path("."));
  auto raw = pf::load_interactions(rc.raw_path, pf::input_format_from_name(rc.input_format));
  pf::InteractionCorpus corpus = pf::kcore_filter(raw, rc.min_core);
  pf::SplitCorpus sp = pf::split(corpus, rc.test_fraction, rc.valid_fraction, rc.seed);
  pf::write_corpus(rc.corpus, corpus, sp);
  std::cout << "users         " << corpus.num_users() << '\n'
            << "items         " << corpus.num_items() << '\n'
            << "interactions  " << corpus.num_interactions() << '\n'
            << "density       " << std::fixed << std::setprecision(3)
            << corpus.density() * 100.0 << "%\n"
            << "train/valid/test  " << sp.num_train() << '/' << sp.num_valid()
            << '/' << sp.num_test() << '\n'
            << "wrote " << rc.corpus << std::endl;
  return 0;
}

// Shared by train and grid. Returns the best validation recall (NaN when the
// run had no validation interactions).
template <typename Real>
double train_one(const pf::RunConfig& rc, bool announce_paths) {
  rc.validate();
  if (rc.corpus.empty()) throw pf::ConfigError("train: corpus path is required");
  auto [corpus, sp] = pf::read_corpus(rc.corpus);
  if (rc.train_with_validation) sp.merge_validation_into_train();
  pf::DirLock lock(rc.out_dir);
  pf::BipartiteGraph graph = pf::build_graph(sp);
  pf::Network<Real> net(rc.model_config(), graph);
  pf::ParamStore<Real> store;
  net.init_params(store, rc.seed);
  const auto tc = rc.template train_config<Real>();

  const fs::path out(rc.out_dir);
  const std::string log_path = (out / "train_log.csv").string();
  const std::string ckpt_path = (out / "checkpoint.bin").string();
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw pf::IoError("cannot open '" + log_path + "' for writing");

  auto progress = [&](const pf::EpochRecord& rec) {
    std::cout << "epoch " << rec.epoch << "  loss " << rec.loss
              << "  val_recall@" << tc.eval_cutoff << " " << rec.val_recall
              << "  (" << std::fixed << std::setprecision(1) << rec.seconds
              << "s)" << std::defaultfloat << std::endl;
  };

  pf::FitResult result;
  try {
    result = pf::fit(net, store, sp, tc, &log, progress);
  } catch (const pf::NumericError&) {
    // keep the last finite parameters so the run can be inspected
    pf::write_checkpoint(ckpt_path, store, rc.resolved_text());
    throw;
  }
  pf::write_checkpoint(ckpt_path, store, rc.resolved_text());
  const bool had_validation = sp.num_valid() > 0;
  if (had_validation) {
    std::cout << "best epoch " << result.best_epoch << "  val_recall@"
              << tc.eval_cutoff << " " << result.best_recall
              << (result.stopped_early ? "  (stopped early)" : "") << std::endl;
  }
  if (announce_paths) {
    std::cout << "wrote " << ckpt_path << "\nwrote " << log_path << std::endl;
  }
  return had_validation ? result.best_recall
                        : std::numeric_limits<double>::quiet_NaN();
}

int run_train(const pf::RunConfig& rc) {
  if (rc.precision == "float32") {
    train_one<float>(rc, true);
  } else {
    train_one<double>(rc, true);
  }
  return 0;
}

int run_grid(const pf::RunConfig& base, const std::vector<std::string>& lrs,
             const std::vector<std::string>& l2s,
             const std::vector<std::string>& dropouts) {
  double best = -1;
  std::string best_cell;
  for (const std::string& lr : lrs) {
    for (const std::string& l2 : l2s) {
      for (const std::string& p : dropouts) {
        pf::RunConfig rc = base;
        rc.set("lr", lr);
        rc.set("l2", l2);
        rc.set("dropout", p);
        const std::string cell = "lr" + lr + "_l2" + l2 + "_p" + p;
        rc.out_dir = (fs::path(base.out_dir) / ("grid_" + cell)).string();
        std::cout << "=== grid cell " << cell << " ===" << std::endl;
        const double recall = rc.precision == "float32"
                                  ? train_one<float>(rc, true)
                                  : train_one<double>(rc, true);
        if (recall > best) {
          best = recall;
          best_cell = cell;
        }
      }
    }
  }
  if (!best_cell.empty()) {
    std::cout << "best cell " << best_cell << "  val_recall " << best << std::endl;
  }
  return 0;
}

std::uint32_t checkpoint_scalar_width(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pf::IoError("cannot open '" + path + "'");
  char magic[sizeof(pf::kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  std::uint32_t version = 0, width = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&width), sizeof(width));
  if (!in) throw pf::IoError(path + ": truncated checkpoint");
  return width;
}

struct EvalArgs {
  std::string checkpoint;
  std::string corpus;
  std::optional<std::int64_t> cutoff;
  std::string target = "test";
  std::string report;
  bool per_user = false;
};

template <typename Real>
int evaluate_impl(const EvalArgs& args, std::int64_t threads) {
  pf::ParamStore<Real> store;
  const std::string meta = pf::read_checkpoint(args.checkpoint, store);
  pf::RunConfig rc = pf::parse_run_config_text(meta, args.checkpoint + " metadata");
  if (args.cutoff) rc.cutoff = *args.cutoff;
  if (threads > 0) rc.threads = threads;

  auto [corpus, sp] = pf::read_corpus(args.corpus);
  const pf::Index entities = corpus.num_users() + corpus.num_items();
  if (store.at("embedding").rows() != entities) {
    throw pf::ConfigError("checkpoint embedding rows " +
                          std::to_string(store.at("embedding").rows()) +
                          " do not match corpus entity count " +
                          std::to_string(entities));
  }
  if (rc.train_with_validation) sp.merge_validation_into_train();
  pf::EvalTarget target;
  if (args.target == "test") target = pf::EvalTarget::kTest;
  else if (args.target == "validation") target = pf::EvalTarget::kValidation;
  else throw pf::ConfigError("unknown eval target '" + args.target + "' (test|validation)");

  pf::Network<Real> net(rc.model_config(), pf::build_graph(sp));
  pf::Matrix<Real> emb = net.eval_embeddings(store);
  pf::MetricsReport report =
      pf::evaluate(emb, sp, target, static_cast<int>(rc.cutoff), args.per_user,
                   static_cast<int>(rc.threads));

  std::string report_path = args.report;
  if (report_path.empty()) {
    const fs::path dir = fs::path(args.checkpoint).parent_path();
    report_path = (dir.empty() ? fs::path(".") : dir) / "report.csv";
  }
  {
    const fs::path dir = fs::path(report_path).parent_path();
    pf::DirLock lock(dir.empty() ? fs::path(".") : dir);
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    if (!out) throw pf::IoError("cannot open '" + report_path + "' for writing");
    out << "cutoff,users_evaluated,users_skipped,recall,ndcg\n"
        << report.cutoff << ',' << report.users_evaluated << ','
        << report.users_skipped << ',' << std::setprecision(10) << report.recall
        << ',' << report.ndcg << '\n';
    if (args.per_user) {
      const fs::path pu_path =
          fs::path(report_path).replace_filename("report_per_user.csv");
      std::ofstream pu(pu_path, std::ios::binary | std::ios::trunc);
      if (!pu) throw pf::IoError("cannot open '" + pu_path.string() + "' for writing");
      pu << "user_id,user_key,recall,ndcg\n";
      for (const auto& row : report.per_user) {
        pu << row.user << ',' << corpus.user_key(row.user) << ','
           << std::setprecision(10) << row.recall << ',' << row.ndcg << '\n';
      }
      std::cout << "wrote " << pu_path.string() << std::endl;
    }
  }
  std::cout << args.target << " recall@" << report.cutoff << " = "
            << std::setprecision(10) << report.recall << '\n'
            << args.target << " ndcg@" << report.cutoff << "   = " << report.ndcg
            << '\n'
            << "users evaluated " << report.users_evaluated << " (skipped "
            << report.users_skipped << ")\n"
            << "wrote " << report_path << std::endl;
  return 0;
}

struct RecommendArgs {
  std::string checkpoint;
  std::string corpus;
  std::string user_key;
  std::int64_t n = 10;
};

template <typename Real>
int recommend_impl(const RecommendArgs& args) {
  if (args.n < 1) throw pf::ConfigError("recommend: n must be positive");
  pf::ParamStore<Real> store;
  const std::string meta = pf::read_checkpoint(args.checkpoint, store);
  pf::RunConfig rc = pf::parse_run_config_text(meta, args.checkpoint + " metadata");
  auto [corpus, sp] = pf::read_corpus(args.corpus);
  const pf::Index user = corpus.user_id(args.user_key);
  if (user < 0) throw pf::ConfigError("unknown user '" + args.user_key + "'");
  if (rc.train_with_validation) sp.merge_validation_into_train();

  pf::Network<Real> net(rc.model_config(), pf::build_graph(sp));
  pf::Matrix<Real> emb = net.eval_embeddings(store);
  const pf::Index m = corpus.num_users();
  const pf::Index n_items = corpus.num_items();
  std::vector<Real> scores(static_cast<std::size_t>(n_items));
  for (pf::Index j = 0; j < n_items; ++j) {
    scores[static_cast<std::size_t>(j)] = emb.row(user).dot(emb.row(m + j));
  }
  const std::vector<pf::Index> mask = sp.train_valid_items(user);
  const std::vector<pf::Index> topn =
      pf::rank_items(scores, mask, static_cast<int>(args.n));
  for (pf::Index j : topn) {
    std::cout << corpus.item_key(j) << '\t' << std::setprecision(8)
              << static_cast<double>(scores[static_cast<std::size_t>(j)]) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prefrank: multi-task attentive graph recommender"};
  app.require_subcommand(1);

  CommonArgs prep_args;
  std::string prep_raw, prep_format, prep_out;
  std::optional<std::int64_t> prep_min_core;
  CLI::App* prepare = app.add_subcommand("prepare", "filter, split and write a canonical corpus");
  add_common_flags(prepare, prep_args);
  prepare->add_option("--raw", prep_raw, "raw interaction file");
  prepare->add_option("--format", prep_format, "raw format: pairs|adjacency");
  prepare->add_option("--min-core", prep_min_core, "k-core threshold (default 10)");
  prepare->add_option("--out", prep_out, "corpus output path");

  CommonArgs train_args;
  std::string train_corpus, train_out;
  CLI::App* train = app.add_subcommand("train", "fit a model and write checkpoint + log");
  add_common_flags(train, train_args);
  train->add_option("--corpus", train_corpus, "prepared corpus path");
  train->add_option("--out", train_out, "output directory");

  CommonArgs grid_args;
  std::string grid_corpus, grid_out;
  std::vector<std::string> grid_lr{"5e-4", "1e-4"};
  std::vector<std::string> grid_l2{"1e-6", "5e-7"};
  std::vector<std::string> grid_dropout{"0.1", "0.2"};
  CLI::App* grid = app.add_subcommand("grid", "train over the lr x l2 x dropout grid");
  add_common_flags(grid, grid_args);
  grid->add_option("--corpus", grid_corpus, "prepared corpus path");
  grid->add_option("--out", grid_out, "parent directory for per-cell runs");
  grid->add_option("--lr-grid", grid_lr, "learning rates to sweep")->delimiter(',');
  grid->add_option("--l2-grid", grid_l2, "L2 coefficients to sweep")->delimiter(',');
  grid->add_option("--dropout-grid", grid_dropout, "dropout ratios to sweep")->delimiter(',');

  EvalArgs eval_args;
  CommonArgs eval_common;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a corpus split");
  evaluate->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  evaluate->add_option("--corpus", eval_args.corpus, "prepared corpus path")->required();
  evaluate->add_option("--cutoff", eval_args.cutoff, "ranking cutoff N (default: from checkpoint)");
  evaluate->add_option("--target", eval_args.target, "test|validation (default test)");
  evaluate->add_option("--report", eval_args.report, "report CSV path");
  evaluate->add_flag("--per-user", eval_args.per_user, "also write per-user metrics CSV");
  evaluate->add_option("--threads", eval_common.threads, "worker threads");

  RecommendArgs rec_args;
  CLI::App* recommend = app.add_subcommand("recommend", "print top-n items for one user");
  recommend->add_option("--checkpoint", rec_args.checkpoint, "checkpoint file")->required();
  recommend->add_option("--corpus", rec_args.corpus, "prepared corpus path")->required();
  recommend->add_option("--user", rec_args.user_key, "original user key")->required();
  recommend->add_option("--n", rec_args.n, "list length (default 10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (prepare->parsed()) {
      pf::RunConfig rc = resolve_config(prep_args);
      if (!prep_raw.empty()) rc.raw_path = prep_raw;
      if (!prep_format.empty()) rc.input_format = prep_format;
      if (prep_min_core) rc.min_core = *prep_min_core;
      if (!prep_out.empty()) rc.corpus = prep_out;
      return run_prepare(rc);
    }
    if (train->parsed()) {
      pf::RunConfig rc = resolve_config(train_args);
      if (!train_corpus.empty()) rc.corpus = train_corpus;
      if (!train_out.empty()) rc.out_dir = train_out;
      return run_train(rc);
    }
    if (grid->parsed()) {
      pf::RunConfig rc = resolve_config(grid_args);
      if (!grid_corpus.empty()) rc.corpus = grid_corpus;
      if (!grid_out.empty()) rc.out_dir = grid_out;
      rc.validate();
      return run_grid(rc, grid_lr, grid_l2, grid_dropout);
    }
    if (evaluate->parsed()) {
      const std::uint32_t width = checkpoint_scalar_width(eval_args.checkpoint);
      const std::int64_t threads = eval_common.threads.value_or(0);
      if (width == sizeof(float)) return evaluate_impl<float>(eval_args, threads);
      return evaluate_impl<double>(eval_args, threads);
    }
    if (recommend->parsed()) {
      const std::uint32_t width = checkpoint_scalar_width(rec_args.checkpoint);
      if (width == sizeof(float)) return recommend_impl<float>(rec_args);
      return recommend_impl<double>(rec_args);
    }
  } catch (const pf::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return 3;
  } catch (const pf::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
