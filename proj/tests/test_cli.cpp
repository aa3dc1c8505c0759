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

// End-to-end tests that drive the installed binary via std::system. The
// binary path arrives through the PREFRANK_CLI compile definition.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "support/tmpdir.hpp"

namespace prefrank {
namespace {

using testing::TempDir;
using testing::read_file;
using testing::write_file;

struct CmdResult {
  int code = -1;
  std::string out;
};

CmdResult run_cli(const TempDir& tmp, const std::string& args) {
  static int serial = 0;
  const std::string capture =
      tmp.file("cmd_out_" + std::to_string(serial++) + ".txt").string();
  const std::string cmd =
      std::string(PREFRANK_CLI) + " " + args + " >" + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  CmdResult r;
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = read_file(capture);
  return r;
}

// 8 users x 12 items, user u likes items (u+j) % 12 for j in [0, 10).
std::string dense_pairs() {
  std::ostringstream out;
  for (int u = 0; u < 8; ++u) {
    for (int j = 0; j < 10; ++j) {
      out << 'u' << u << '\t' << 'i' << (u + j) % 12 << '\n';
    }
  }
  return out.str();
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

std::string prepare_corpus(const TempDir& tmp) {
  write_file(tmp, "raw.txt", dense_pairs());
  const std::string corpus = tmp.file("corpus.bin").string();
  auto r = run_cli(tmp, "prepare --raw " + tmp.file("raw.txt").string() +
                            " --min-core 2 --out " + corpus + " --seed 3");
  EXPECT_EQ(r.code, 0) << r.out;
  return corpus;
}

std::string small_train_args(const std::string& corpus, const std::string& out) {
  return "train --corpus " + corpus + " --out " + out +
         " --set tasks=2 --set total_dim=8 --set max_epochs=3"
         " --set batch_size=32 --set lr=0.01 --set patience=3 --seed 5";
}

TEST(CliPrepare, ReportsStatsAndWritesStableBytes) {
  TempDir tmp;
  write_file(tmp, "raw.txt", dense_pairs());
  const std::string corpus_a = tmp.file("a.bin").string();
  auto r = run_cli(tmp, "prepare --raw " + tmp.file("raw.txt").string() +
                            " --min-core 2 --out " + corpus_a + " --seed 3");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("users         8"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("items         12"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("interactions  80"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("density"), std::string::npos);
  EXPECT_NE(r.out.find('%'), std::string::npos);
  EXPECT_NE(r.out.find("train/valid/test  56/8/16"), std::string::npos) << r.out;

  const std::string corpus_b = tmp.file("b.bin").string();
  auto r2 = run_cli(tmp, "prepare --raw " + tmp.file("raw.txt").string() +
                             " --min-core 2 --out " + corpus_b + " --seed 3");
  ASSERT_EQ(r2.code, 0) << r2.out;
  EXPECT_EQ(read_file(tmp.file("a.bin")), read_file(tmp.file("b.bin")));
}

TEST(CliTrain, RerunWritesIdenticalCheckpoint) {
  TempDir tmp;
  const std::string corpus = prepare_corpus(tmp);
  const std::string out = tmp.file("run").string();
  auto r1 = run_cli(tmp, small_train_args(corpus, out));
  ASSERT_EQ(r1.code, 0) << r1.out;
  const std::string bytes1 = read_file(tmp.file("run/checkpoint.bin"));
  const std::string log1 = read_file(tmp.file("run/train_log.csv"));
  ASSERT_FALSE(bytes1.empty());
  EXPECT_NE(r1.out.find("best epoch"), std::string::npos) << r1.out;

  auto r2 = run_cli(tmp, small_train_args(corpus, out));
  ASSERT_EQ(r2.code, 0) << r2.out;
  EXPECT_EQ(bytes1, read_file(tmp.file("run/checkpoint.bin")));
  // Log rows repeat except for the wall-clock column.
  std::istringstream a(log1), b(read_file(tmp.file("run/train_log.csv")));
  std::string row_a, row_b;
  while (std::getline(a, row_a) && std::getline(b, row_b)) {
    auto fa = split_csv_row(row_a);
    auto fb = split_csv_row(row_b);
    ASSERT_EQ(fa.size(), 5u);
    for (std::size_t k = 0; k + 1 < fa.size(); ++k) EXPECT_EQ(fa[k], fb[k]);
  }
}

TEST(CliEvaluate, ValidationTargetMatchesTrainLogBestRow) {
  TempDir tmp;
  const std::string corpus = prepare_corpus(tmp);
  const std::string out = tmp.file("run").string();
  auto r1 = run_cli(tmp, small_train_args(corpus, out));
  ASSERT_EQ(r1.code, 0) << r1.out;

  double best_recall = -1;
  std::istringstream log(read_file(tmp.file("run/train_log.csv")));
  std::string row;
  std::getline(log, row);  // header
  while (std::getline(log, row)) {
    auto fields = split_csv_row(row);
    ASSERT_EQ(fields.size(), 5u);
    best_recall = std::max(best_recall, std::stod(fields[2]));
  }
  ASSERT_GE(best_recall, 0.0);

  auto r2 = run_cli(tmp, "evaluate --checkpoint " +
                             tmp.file("run/checkpoint.bin").string() +
                             " --corpus " + corpus + " --target validation");
  ASSERT_EQ(r2.code, 0) << r2.out;
  std::istringstream report(read_file(tmp.file("run/report.csv")));
  std::getline(report, row);
  EXPECT_EQ(row, "cutoff,users_evaluated,users_skipped,recall,ndcg");
  ASSERT_TRUE(std::getline(report, row));
  auto fields = split_csv_row(row);
  ASSERT_EQ(fields.size(), 5u);
  EXPECT_EQ(fields[0], "20");
  EXPECT_NEAR(std::stod(fields[3]), best_recall, 1e-9);
}

TEST(CliEvaluate, PerUserReportHasOneRowPerEvaluatedUser) {
  TempDir tmp;
  const std::string corpus = prepare_corpus(tmp);
  const std::string out = tmp.file("run").string();
  ASSERT_EQ(run_cli(tmp, small_train_args(corpus, out)).code, 0);
  auto r = run_cli(tmp, "evaluate --checkpoint " +
                            tmp.file("run/checkpoint.bin").string() +
                            " --corpus " + corpus + " --per-user");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream pu(read_file(tmp.file("run/report_per_user.csv")));
  std::string row;
  std::getline(pu, row);
  EXPECT_EQ(row, "user_id,user_key,recall,ndcg");
  int rows = 0;
  while (std::getline(pu, row)) {
    if (!row.empty()) ++rows;
  }
  EXPECT_EQ(rows, 8);  // every user holds test interactions here
}

TEST(CliRecommend, PrintsOnlyUnseenItemsWithoutPadding) {
  TempDir tmp;
  // u0 has seen every item except i3; u1 keeps i3 alive through k-core.
  write_file(tmp, "raw.txt", "u0\ti0\nu0\ti1\nu0\ti2\nu1\ti3\nu1\ti0\n");
  const std::string corpus = tmp.file("corpus.bin").string();
  auto prep = run_cli(tmp, "prepare --raw " + tmp.file("raw.txt").string() +
                               " --min-core 1 --out " + corpus +
                               " --set test_fraction=0 --set valid_fraction=0");
  ASSERT_EQ(prep.code, 0) << prep.out;

  const std::string out = tmp.file("run").string();
  auto tr = run_cli(tmp, "train --corpus " + corpus + " --out " + out +
                             " --set tasks=1 --set total_dim=4"
                             " --set max_epochs=1 --set batch_size=8");
  ASSERT_EQ(tr.code, 0) << tr.out;

  auto rec = run_cli(tmp, "recommend --checkpoint " +
                              tmp.file("run/checkpoint.bin").string() +
                              " --corpus " + corpus + " --user u0 --n 5");
  ASSERT_EQ(rec.code, 0) << rec.out;
  std::istringstream lines(rec.out);
  std::vector<std::string> items;
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty()) items.push_back(line.substr(0, line.find('\t')));
  }
  ASSERT_EQ(items.size(), 1u) << rec.out;
  EXPECT_EQ(items[0], "i3");

  auto missing = run_cli(tmp, "recommend --checkpoint " +
                                  tmp.file("run/checkpoint.bin").string() +
                                  " --corpus " + corpus + " --user nobody");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.out.find("unknown user"), std::string::npos) << missing.out;
}

TEST(CliGrid, SweepsEveryCellAndReportsBest) {
  TempDir tmp;
  const std::string corpus = prepare_corpus(tmp);
  const std::string out = tmp.file("sweep").string();
  auto r = run_cli(tmp, "grid --corpus " + corpus + " --out " + out +
                            " --set tasks=2 --set total_dim=8"
                            " --set max_epochs=2 --set batch_size=32"
                            " --set patience=2 --seed 5"
                            " --lr-grid 0.01,0.005 --l2-grid 1e-6"
                            " --dropout-grid 0.1");
  ASSERT_EQ(r.code, 0) << r.out;

  const std::vector<std::string> cells = {"lr0.01_l21e-6_p0.1",
                                          "lr0.005_l21e-6_p0.1"};
  for (const std::string& cell : cells) {
    EXPECT_NE(r.out.find("=== grid cell " + cell + " ==="), std::string::npos)
        << r.out;
    EXPECT_FALSE(read_file(tmp.file("sweep/grid_" + cell + "/checkpoint.bin"))
                     .empty());
    EXPECT_FALSE(read_file(tmp.file("sweep/grid_" + cell + "/train_log.csv"))
                     .empty());
  }

  const auto pos = r.out.find("best cell ");
  ASSERT_NE(pos, std::string::npos) << r.out;
  const std::string tail = r.out.substr(pos + 10);
  EXPECT_TRUE(tail.rfind(cells[0], 0) == 0 || tail.rfind(cells[1], 0) == 0)
      << r.out;
}

TEST(CliTrain, Float32PrecisionRoundTripsThroughEvaluate) {
  TempDir tmp;
  const std::string corpus = prepare_corpus(tmp);
  const std::string out = tmp.file("run32").string();
  auto tr = run_cli(tmp, small_train_args(corpus, out) +
                             " --set precision=float32");
  ASSERT_EQ(tr.code, 0) << tr.out;

  const std::string bytes = read_file(tmp.file("run32/checkpoint.bin"));
  ASSERT_GT(bytes.size(), 16u);
  // Scalar width lives at offset 12 (after the 8-byte magic and the version).
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 4u);

  auto ev = run_cli(tmp, "evaluate --checkpoint " +
                             tmp.file("run32/checkpoint.bin").string() +
                             " --corpus " + corpus + " --target validation");
  ASSERT_EQ(ev.code, 0) << ev.out;
  std::istringstream report(read_file(tmp.file("run32/report.csv")));
  std::string row;
  std::getline(report, row);
  EXPECT_EQ(row, "cutoff,users_evaluated,users_skipped,recall,ndcg");
  ASSERT_TRUE(std::getline(report, row));
  auto fields = split_csv_row(row);
  ASSERT_EQ(fields.size(), 5u);
  EXPECT_EQ(fields[1], "8");
  const double recall = std::stod(fields[3]);
  EXPECT_GE(recall, 0.0);
  EXPECT_LE(recall, 1.0);
}

TEST(CliErrors, MapToDocumentedExitCodes) {
  TempDir tmp;
  const std::string corpus = prepare_corpus(tmp);

  auto bad_ckpt = run_cli(tmp, "evaluate --checkpoint " +
                                   tmp.file("absent.bin").string() +
                                   " --corpus " + corpus);
  EXPECT_EQ(bad_ckpt.code, 2) << bad_ckpt.out;

  auto bad_tasks = run_cli(tmp, "train --corpus " + corpus + " --out " +
                                    tmp.file("x").string() + " --set tasks=9");
  EXPECT_EQ(bad_tasks.code, 2) << bad_tasks.out;

  auto bad_key = run_cli(tmp, "train --corpus " + corpus + " --out " +
                                  tmp.file("y").string() + " --set nope=1");
  EXPECT_EQ(bad_key.code, 2) << bad_key.out;
  EXPECT_NE(bad_key.out.find("unknown config key"), std::string::npos);

  auto bad_flag = run_cli(tmp, "train --definitely-not-a-flag");
  EXPECT_EQ(bad_flag.code, 2) << bad_flag.out;

  auto no_sub = run_cli(tmp, "");
  EXPECT_EQ(no_sub.code, 2) << no_sub.out;
}

}  // namespace
}  // namespace prefrank
