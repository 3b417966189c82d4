// Copyright 2026 The CSLM Authors
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

// Exercises the command surface through real subprocesses.

#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const std::string kBin = CSLM_BIN_PATH;

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "cmd_output.txt";
  const std::string cmd = "cd " + dir.string() + " && " + kBin + " " + args +
                          " > " + out_file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  int code = -1;
  if (WIFEXITED(status)) code = WEXITSTATUS(status);
  return {code, ss.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cslm_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("stats reports the table and exits zero") {
  TempDir dir;
  write_file(dir.path / "c.txt", "حلوة research\nok good\n\nحلوة جدا\n");
  RunResult r = run("stats c.txt", dir.path);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("sentences_total\t3") != std::string::npos);
  CHECK(r.output.find("sentences_code_switched\t1") != std::string::npos);

  write_file(dir.path / "empty.txt", "");
  RunResult empty = run("stats empty.txt", dir.path);
  CHECK(empty.exit_code == 0);
  CHECK(empty.output.find("sentences_total\t0") != std::string::npos);
}

TEST_CASE("method input requirements map to usage errors") {
  TempDir dir;
  write_file(dir.path / "text.txt", "قط cat\nكلب dog\nقط كلب\ncat dog\n");

  SUBCASE("bics needs no cross-lingual resources") {
    RunResult r = run(
        "train-embed --method bics-cbow --text text.txt --out e.txt --dim 4 "
        "--epochs 1",
        dir.path);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir.path / "e.txt"));
    CHECK(fs::exists(dir.path / "e.txt.manifest.json"));
  }

  SUBCASE("bicca without --lexicon is a usage error with no output") {
    RunResult r = run(
        "train-embed --method bicca-skip --text text.txt --out e.txt --dim 4",
        dir.path);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("lexicon") != std::string::npos);
    CHECK(!fs::exists(dir.path / "e.txt"));
  }

  SUBCASE("biskip without alignments is a usage error") {
    RunResult r = run(
        "train-embed --method biskip --text text.txt --out e.txt --dim 4",
        dir.path);
    CHECK(r.exit_code == 2);
    CHECK(!fs::exists(dir.path / "e.txt"));
  }

  SUBCASE("biccaonbiskip needs both alignments and a lexicon") {
    write_file(dir.path / "lex.tsv", "قط\tcat\n");
    RunResult no_parallel = run(
        "train-embed --method biccaonbiskip --text text.txt --lexicon lex.tsv "
        "--out e.txt --dim 4",
        dir.path);
    CHECK(no_parallel.exit_code == 2);
    write_file(dir.path / "src.txt", "قط\n");
    write_file(dir.path / "tgt.txt", "cat\n");
    write_file(dir.path / "al.txt", "0-0\n");
    RunResult no_lexicon = run(
        "train-embed --method biccaonbiskip --text text.txt "
        "--parallel-src src.txt --parallel-tgt tgt.txt --align al.txt "
        "--out e.txt --dim 4",
        dir.path);
    CHECK(no_lexicon.exit_code == 2);
  }

  SUBCASE("unknown method is rejected by the parser") {
    RunResult r = run("train-embed --method nonsense --out e.txt", dir.path);
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("missing input files are runtime errors") {
  TempDir dir;
  RunResult r = run("stats not_there.txt", dir.path);
  CHECK(r.exit_code == 1);
}

TEST_CASE("synth, embeddings, the LM and both evals compose") {
  TempDir dir;
  RunResult synth = run(
      "synth --out-dir world --vocab 40 --topics 2 --mono-ar 80 --mono-en 70 "
      "--cs 40 --lm-mono-ar 20 --lm-mono-en 10 --lm-cs 40 --seed 5",
      dir.path);
  REQUIRE(synth.exit_code == 0);
  for (const char* f : {"text.txt", "lm.txt", "parallel.src.txt",
                        "parallel.tgt.txt", "parallel.align.txt",
                        "lexicon.tsv", "gold.tsv", "synth.manifest.json"})
    CHECK(fs::exists(dir.path / "world" / f));

  RunResult embed = run(
      "train-embed --method biskip --text world/text.txt "
      "--parallel-src world/parallel.src.txt "
      "--parallel-tgt world/parallel.tgt.txt --align world/parallel.align.txt "
      "--out biskip.emb --dim 8 --epochs 1 --negatives 4 --window 3",
      dir.path);
  REQUIRE(embed.exit_code == 0);

  RunResult lm = run(
      "train-lm --train world/lm.txt --dev world/lm.txt "
      "--embeddings biskip.emb --out lm.ckpt --dim 8 --hidden 6 "
      "--max-epochs 2 --patience 3 --seed 1",
      dir.path);
  REQUIRE(lm.exit_code == 0);
  CHECK(lm.output.find("best_dev_ppl") != std::string::npos);

  RunResult ppl =
      run("eval-ppl --checkpoint lm.ckpt --corpus world/lm.txt", dir.path);
  CHECK(ppl.exit_code == 0);
  CHECK(ppl.output.find("perplexity\t") != std::string::npos);
  CHECK(ppl.output.find("oov_rate\t") != std::string::npos);

  RunResult cat = run(
      "eval-cat --embeddings biskip.emb --gold world/gold.tsv --mode all",
      dir.path);
  CHECK(cat.exit_code == 0);
  CHECK(cat.output.find("arabic\t") != std::string::npos);
  CHECK(cat.output.find("english\t") != std::string::npos);
  CHECK(cat.output.find("monolingual_avg\t") != std::string::npos);
  CHECK(cat.output.find("bilingual\t") != std::string::npos);

  RunResult nn = run("nn --embeddings biskip.emb --word w0 --top 3", dir.path);
  CHECK(nn.exit_code == 0);
  CHECK(nn.output.rfind("w0\t", 0) == 0);  // query word leads the line
  RunResult nn_missing =
      run("nn --embeddings biskip.emb --word notaword", dir.path);
  CHECK(nn_missing.exit_code == 1);
}

TEST_CASE("uniform checkpoint evaluates to |V| perplexity") {
  TempDir dir;
  write_file(dir.path / "train.txt", "a b c\nb c a\n");
  RunResult lm = run(
      "train-lm --train train.txt --dev train.txt --out lm.ckpt --dim 3 "
      "--hidden 2 --max-epochs 1 --patience 1",
      dir.path);
  REQUIRE(lm.exit_code == 0);

  // zero every tensor row: the model becomes exactly uniform
  std::ifstream in(dir.path / "lm.ckpt");
  std::ostringstream zeroed;
  std::string line;
  bool past_vocab = false;
  while (std::getline(in, line)) {
    if (line.rfind("tensor ", 0) == 0) {
      past_vocab = true;
      zeroed << line << '\n';
      continue;
    }
    if (past_vocab) {
      std::istringstream ls(line);
      std::string tok;
      bool first = true;
      while (ls >> tok) {
        zeroed << (first ? "" : " ") << "0";
        first = false;
      }
      zeroed << '\n';
    } else {
      zeroed << line << '\n';
    }
  }
  write_file(dir.path / "uniform.ckpt", zeroed.str());

  RunResult ppl =
      run("eval-ppl --checkpoint uniform.ckpt --corpus train.txt", dir.path);
  CHECK(ppl.exit_code == 0);
  // vocabulary: a b c + <s> </s> <unk> = 6
  CHECK(ppl.output.find("perplexity\t6\n") != std::string::npos);
}

TEST_CASE("manifest replay reproduces outputs bitwise") {
  TempDir dir;
  write_file(dir.path / "text.txt",
             "قط cat بيت\nكلب dog\nقط كلب بيت\ncat dog house\nبيت house\n");
  RunResult first = run(
      "train-embed --method bics-skip --text text.txt --out e.txt --dim 6 "
      "--epochs 2 --seed 9",
      dir.path);
  REQUIRE(first.exit_code == 0);
  const std::string original = read_file(dir.path / "e.txt");
  REQUIRE(fs::exists(dir.path / "e.txt.manifest.json"));

  fs::remove(dir.path / "e.txt");
  RunResult replay = run("--manifest e.txt.manifest.json", dir.path);
  CHECK(replay.exit_code == 0);
  CHECK(read_file(dir.path / "e.txt") == original);

  SUBCASE("changed inputs refuse to replay") {
    write_file(dir.path / "text.txt", "totally different\n");
    RunResult refused = run("--manifest e.txt.manifest.json", dir.path);
    CHECK(refused.exit_code == 1);
    CHECK(refused.output.find("changed") != std::string::npos);
  }
}

TEST_CASE("exp produces one row per method plus the baseline") {
  TempDir dir;
  RunResult synth = run(
      "synth --out-dir w --vocab 30 --topics 2 --mono-ar 40 --mono-en 40 "
      "--cs 30 --lm-mono-ar 15 --lm-mono-en 10 --lm-cs 25 --seed 2",
      dir.path);
  REQUIRE(synth.exit_code == 0);
  RunResult exp = run(
      "exp --design 1 --text w/text.txt --lm-corpus w/lm.txt "
      "--lexicon w/lexicon.tsv --methods cbow,bicca-cbow --dim 6 --hidden 5 "
      "--embed-epochs 1 --lm-max-epochs 2 --lm-patience 2 --out r.tsv",
      dir.path);
  REQUIRE(exp.exit_code == 0);
  const std::string table = read_file(dir.path / "r.tsv");
  CHECK(table.find("method\tdev_ppl\ttest_ppl") != std::string::npos);
  CHECK(table.find("baseline\t") != std::string::npos);
  CHECK(table.find("cbow\t") != std::string::npos);
  CHECK(table.find("bicca-cbow\t") != std::string::npos);
}
