#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
};

CliRun run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + TREECRF_CLI + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t got = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), got);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string data(const std::string& name) { return std::string(TREECRF_TEST_DATA) + "/" + name; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("treecrf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string train(const std::string& mode, const std::string& model,
                    const std::string& extra = "", const std::string& env = "") {
    const CliRun r = run("train --train " + data("toy_train.conllu") + " -m " + model + " --mode " +
                          mode +
                          " --word-dim 8 --pos-dim 4 --arc-dim 12 --sib-dim 6 --label-dim 6"
                          " --max-epochs 3 " + extra,
                      env);
    EXPECT_EQ(r.code, 0) << r.out;
    return r.out;
  }

  fs::path dir_;
};

}  // namespace

TEST(CliBasics, OracleCheckPasses) {
  const CliRun r = run("oracle-check --instances 5");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("count n=3 single: 7 trees"), std::string::npos);
  EXPECT_NE(r.out.find("oracle check passed"), std::string::npos);
}

TEST(CliBasics, InjectedFaultIsReported) {
  const CliRun r = run("oracle-check --instances 2 --inject-fault");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(CliBasics, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("parse --no-such-flag").code, 2);
  EXPECT_EQ(run("train --train " + data("toy_train.conllu") + " -m x --mode tree").code, 2);
  EXPECT_EQ(run("eval --pred missing.conllu --gold missing.conllu").code, 2);
}

TEST(CliBasics, EvalReportsMetrics) {
  const CliRun r = run("eval --dialect conllx --sib --pred " + data("telescope.conllx") + " --gold " +
                    data("telescope.conllx"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("UAS=100.00"), std::string::npos);
  EXPECT_NE(r.out.find("SIB_F=100.00"), std::string::npos);
  const CliRun partial = run("eval --dialect conllx --pred " + data("telescope.conllx") + " --gold " +
                          data("telescope_partial.conllx"));
  EXPECT_EQ(partial.code, 1);  // sentence count differs
}

TEST_F(Cli, TrainParseEval) {
  const std::string model = path("crf.ckpt");
  train("crf", model, "--log " + path("train.log"));
  EXPECT_NE(slurp(path("train.log")).find("epoch 3 loss"), std::string::npos);

  const CliRun parsed = run("parse -m " + model + " -i " + data("toy_dev.conllu") +
                         " -o " + path("pred.conllu") + " --decode greedy");
  EXPECT_EQ(parsed.code, 0) << parsed.out;
  EXPECT_NE(parsed.out.find("fast path hit rate"), std::string::npos);

  const CliRun scored = run("eval --pred " + path("pred.conllu") + " --gold " + data("toy_dev.conllu"));
  EXPECT_EQ(scored.code, 0) << scored.out;
  EXPECT_NE(scored.out.find("LAS="), std::string::npos);
}

TEST_F(Cli, SameSeedSameBytes) {
  train("crf2o", path("a.ckpt"), "--log " + path("a.log"));
  train("crf2o", path("b.ckpt"), "--log " + path("b.log"));
  EXPECT_EQ(slurp(path("a.ckpt")), slurp(path("b.ckpt")));
  EXPECT_EQ(slurp(path("a.log")), slurp(path("b.log")));

  train("crf2o", path("c.ckpt"), "", "TREECRF_SEED=99");
  EXPECT_NE(slurp(path("a.ckpt")), slurp(path("c.ckpt")));

  for (const char* mode : {"viterbi", "mbr"}) {
    const std::string a = path(std::string("pa_") + mode), b = path(std::string("pb_") + mode);
    run("parse -m " + path("a.ckpt") + " -i " + data("toy_dev.conllu") + " -o " + a + " --decode " + mode);
    run("parse -m " + path("b.ckpt") + " -i " + data("toy_dev.conllu") + " -o " + b + " --decode " + mode);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
  }
}

TEST_F(Cli, MarginalsDump) {
  train("crf2o", path("m.ckpt"));
  const CliRun r = run("marginals --sib -m " + path("m.ckpt") + " -i " + data("toy_dev.conllu") +
                    " -o " + path("m.txt"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(slurp(path("m.txt")).rfind("#1 ", 0), 0u);

  train("loc", path("loc.ckpt"));
  EXPECT_EQ(run("marginals -m " + path("loc.ckpt") + " -i " + data("toy_dev.conllu")).code, 1);
  EXPECT_EQ(run("parse -m " + path("loc.ckpt") + " -i " + data("toy_dev.conllu") + " --decode mbr").code, 1);
}

TEST_F(Cli, PartialTrainingData) {
  const CliRun r = run("train --train " + data("toy_partial.conllu") + " -m " + path("p.ckpt") +
                    " --mode crf --word-dim 8 --pos-dim 4 --arc-dim 12 --label-dim 6 --max-epochs 2");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("0 skipped"), std::string::npos);
}

TEST_F(Cli, ToyTreebankMatchesFixture) {
  EXPECT_EQ(run("toy-treebank --count 50 --seed 7 -o " + path("t.conllu")).code, 0);
  EXPECT_EQ(slurp(path("t.conllu")), slurp(data("toy_train.conllu")));
}
