#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kmt/session.hpp"
#include "kmt/theory.hpp"

namespace kmt {

/// All compiled-in rule packs.
Registry standardRegistry();

/// A graph preloaded with the built-in theories LF, PLF, LLFP, and LFW
/// (their prelude sources are parsed and checked).
std::unique_ptr<TheoryGraph> standardGraph();

struct LoadOptions {
  long fuel = 10000;
  std::vector<std::string> denyRules;
  std::vector<std::string> allowRules;
  int jobs = 1;
};

struct FileReport {
  std::string path;
  std::vector<TheoryReport> theories;
  std::vector<std::string> loadErrors;
  bool ok() const;
};

/// Parse the given files into the graph and check every theory they
/// define, in dependency order. With jobs > 1, theories whose
/// dependencies are ready are checked in parallel.
std::vector<FileReport> loadAndCheck(TheoryGraph& graph,
                                     const std::vector<std::string>& paths,
                                     const LoadOptions& opts);

/// Same, for in-memory sources (path, text).
std::vector<FileReport> loadAndCheckSources(
    TheoryGraph& graph,
    const std::vector<std::pair<std::string, std::string>>& sources,
    const LoadOptions& opts);

std::string readFile(const std::string& path);

}  // namespace kmt
