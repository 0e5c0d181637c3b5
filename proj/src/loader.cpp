#include "kmt/loader.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "kmt/packs/lf.hpp"
#include "kmt/packs/linear.hpp"
#include "kmt/packs/llfp.hpp"
#include "kmt/packs/rewrite.hpp"
#include "kmt/packs/wtypes.hpp"
#include "kmt/parser.hpp"

namespace kmt {

Registry standardRegistry() {
  Registry r;
  lf::registerRules(r);
  llfp::registerRules(r);
  rewrite::registerRules(r);
  linear::registerRules(r);
  wtypes::registerRules(r);
  return r;
}

std::unique_ptr<TheoryGraph> standardGraph() {
  auto graph = std::make_unique<TheoryGraph>();
  graph->registry = standardRegistry();
  std::string prelude = lf::preludeLF() + lf::preludePLF() +
                        llfp::preludeLLFP() + wtypes::preludeLFW();
  for (auto& t : parseTheoryFile(prelude, "<builtin>")) {
    t->builtin = true;
    graph->addTheory(t);
  }
  // the built-ins must check; anything else is a programming error
  for (const std::string name : {"LF", "PLF", "LLFP", "LFW"}) {
    CheckSession session(*graph, name);
    auto rep = session.checkAll();
    if (!rep.ok()) {
      std::string msg = "builtin theory " + name + " failed to check";
      for (const auto& d : rep.decls)
        if (!d.ok) msg += "\n  " + d.message;
      throw std::logic_error(msg);
    }
  }
  return graph;
}

bool FileReport::ok() const {
  if (!loadErrors.empty()) return false;
  return std::all_of(theories.begin(), theories.end(),
                     [](const TheoryReport& t) { return t.ok(); });
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

struct PendingTheory {
  std::string name;
  size_t fileIndex;
  std::set<std::string> deps;  // user theories it needs checked first
};

}  // namespace

std::vector<FileReport> loadAndCheckSources(
    TheoryGraph& graph,
    const std::vector<std::pair<std::string, std::string>>& sources,
    const LoadOptions& opts) {
  graph.deniedRules.insert(opts.denyRules.begin(), opts.denyRules.end());
  graph.allowedRules.insert(opts.allowRules.begin(), opts.allowRules.end());

  std::vector<FileReport> reports(sources.size());
  std::vector<PendingTheory> pending;
  std::set<std::string> userTheories;

  for (size_t i = 0; i < sources.size(); ++i) {
    reports[i].path = sources[i].first;
    try {
      for (auto& t : parseTheoryFile(sources[i].second, sources[i].first)) {
        userTheories.insert(t->name);
        PendingTheory p;
        p.name = t->name;
        p.fileIndex = i;
        if (t->metaTheory) p.deps.insert(*t->metaTheory);
        for (const auto& item : t->body)
          if (const auto* inc = std::get_if<Include>(&item))
            p.deps.insert(inc->theory);
        graph.addTheory(std::move(t));
        pending.push_back(std::move(p));
      }
    } catch (const ParseError& e) {
      reports[i].loadErrors.push_back(e.render());
    } catch (const TheoryError& e) {
      reports[i].loadErrors.push_back(e.pos.str() + ": error: " + e.message);
    }
  }

  // dependency waves; only dependencies on user theories gate scheduling
  std::set<std::string> done;
  CheckOptions copts;
  copts.fuel = opts.fuel;
  auto ready = [&](const PendingTheory& p) {
    return std::all_of(p.deps.begin(), p.deps.end(), [&](const std::string& d) {
      return !userTheories.count(d) || done.count(d);
    });
  };

  std::vector<bool> processed(pending.size(), false);
  for (;;) {
    std::vector<size_t> wave;
    for (size_t i = 0; i < pending.size(); ++i)
      if (!processed[i] && ready(pending[i])) wave.push_back(i);
    if (wave.empty()) break;

    auto runOne = [&](size_t idx) {
      CheckSession session(graph, pending[idx].name, copts);
      return session.checkAll();
    };

    if (opts.jobs > 1 && wave.size() > 1) {
      std::vector<std::future<TheoryReport>> futs;
      futs.reserve(wave.size());
      for (size_t idx : wave)
        futs.push_back(std::async(std::launch::async, runOne, idx));
      for (size_t k = 0; k < wave.size(); ++k) {
        reports[pending[wave[k]].fileIndex].theories.push_back(futs[k].get());
        processed[wave[k]] = true;
        done.insert(pending[wave[k]].name);
      }
    } else {
      for (size_t idx : wave) {
        reports[pending[idx].fileIndex].theories.push_back(runOne(idx));
        processed[idx] = true;
        done.insert(pending[idx].name);
      }
    }
  }

  for (size_t i = 0; i < pending.size(); ++i) {
    if (!processed[i]) {
      reports[pending[i].fileIndex].loadErrors.push_back(
          "theory " + pending[i].name +
          " has unresolvable or cyclic dependencies");
    }
  }
  return reports;
}

std::vector<FileReport> loadAndCheck(TheoryGraph& graph,
                                     const std::vector<std::string>& paths,
                                     const LoadOptions& opts) {
  std::vector<std::pair<std::string, std::string>> sources;
  std::vector<FileReport> failed;
  for (const auto& p : paths) {
    try {
      sources.push_back({p, readFile(p)});
    } catch (const std::exception& e) {
      FileReport r;
      r.path = p;
      r.loadErrors.push_back(e.what());
      failed.push_back(std::move(r));
    }
  }
  auto reports = loadAndCheckSources(graph, sources, opts);
  reports.insert(reports.end(), failed.begin(), failed.end());
  return reports;
}

}  // namespace kmt
