#pragma once

// Runs the command-line tool through the shell and captures its output.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "arsent/corpus.hpp"

namespace cli {

struct Result {
  int status = -1;
  std::string out;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Result run(const std::string& args, const std::filesystem::path& scratch) {
  const auto log = scratch / "cli_output.txt";
  const std::string cmd = std::string("\"") + ARSENT_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  Result r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_file(log);
  return r;
}

inline void write_corpus_csv(const arsent::LabeledCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "id,text,label\n";
  for (const auto& d : corpus) out << d.id << "," << d.text << "," << arsent::to_string(d.label) << "\n";
}

}  // namespace cli
