// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "multinet/classes.hpp"
#include "multinet/data.hpp"
#include "multinet/errors.hpp"

namespace fs = std::filesystem;

namespace multinet {

Layout parse_layout(const std::string& name) {
  if (name == "breakhis-tree" || name == "breakhis" || name == "tree") return Layout::kBreakhisTree;
  if (name == "manifest" || name == "csv") return Layout::kManifest;
  throw ConfigError("unknown dataset layout '" + name + "' (known: breakhis-tree, manifest)");
}

std::size_t ScanResult::count_magnification(std::size_t m) const {
  std::size_t n = 0;
  for (const auto& row : counts) n += row[m];
  return n;
}

std::size_t ScanResult::count_class(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t v : counts[c]) n += v;
  return n;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_png_name(const fs::path& p) { return lower(p.extension().string()) == ".png"; }

void add_sample(ScanResult& result, const fs::path& file, std::size_t label, std::size_t mag) {
  if (!has_png_signature(file)) {
    result.skipped.push_back({file.string(), "missing PNG signature"});
    return;
  }
  result.samples.push_back(
      {file.string(), label, std::string(kClassNames[label]), std::string(kMagnifications[mag])});
  ++result.counts[label][mag];
}

void scan_tree(const fs::path& root, ScanResult& result) {
  std::vector<fs::path> groups;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = lower(entry.path().filename().string());
    if (name == "benign" || name == "malignant") {
      groups.push_back(entry.path());
    } else {
      result.warnings.push_back("ignoring directory " + entry.path().string() + " (expected benign or malignant)");
    }
  }
  for (const auto& group : groups) {
    const std::string group_name = lower(group.filename().string());
    for (const auto& sub : fs::directory_iterator(group)) {
      if (!sub.is_directory()) continue;
      const auto label = class_index(sub.path().filename().string());
      if (!label) throw DataError("unknown class directory " + sub.path().string());
      if (class_group(*label) != group_name) {
        throw DataError("class directory " + sub.path().string() + " is filed under " + group_name + " but " +
                        std::string(kClassNames[*label]) + " is " + std::string(class_group(*label)));
      }
      for (const auto& entry : fs::recursive_directory_iterator(sub.path())) {
        if (!entry.is_regular_file()) continue;
        const fs::path& file = entry.path();
        if (!is_png_name(file)) {
          result.skipped.push_back({file.string(), "not a .png file"});
          continue;
        }
        std::optional<std::size_t> mag;
        for (fs::path dir = file.parent_path(); !mag && dir != sub.path() && dir.has_relative_path();
             dir = dir.parent_path()) {
          mag = magnification_index(dir.filename().string());
        }
        if (!mag) {
          result.skipped.push_back({file.string(), "no magnification directory above the file"});
          continue;
        }
        add_sample(result, file, *label, *mag);
      }
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
  }
  return fields;
}

void scan_manifest(const fs::path& root, ScanResult& result) {
  const fs::path csv = fs::is_directory(root) ? root / "manifest.csv" : root;
  std::ifstream in(csv);
  if (!in) throw DataError("cannot open manifest " + csv.string());
  const fs::path base = csv.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1 && !fields.empty() && lower(fields[0]) == "path") continue;
    if (fields.size() != 3) {
      throw DataError(csv.string() + ":" + std::to_string(line_no) + ": expected path,class_name,magnification");
    }
    const auto label = class_index(fields[1]);
    if (!label) throw DataError(csv.string() + ":" + std::to_string(line_no) + ": unknown class '" + fields[1] + "'");
    const auto mag = magnification_index(fields[2]);
    if (!mag) {
      throw DataError(csv.string() + ":" + std::to_string(line_no) + ": unknown magnification '" + fields[2] + "'");
    }
    fs::path file = fields[0];
    if (file.is_relative()) file = base / file;
    if (!fs::is_regular_file(file)) {
      result.skipped.push_back({file.string(), "file not found"});
      continue;
    }
    add_sample(result, file, *label, *mag);
  }
}

}  // namespace

ScanResult scan_dataset(const fs::path& root, Layout layout) {
  if (!fs::exists(root)) throw DataError("dataset root " + root.string() + " does not exist");
  ScanResult result;
  if (layout == Layout::kBreakhisTree) {
    if (!fs::is_directory(root)) throw DataError("dataset root " + root.string() + " is not a directory");
    scan_tree(root, result);
  } else {
    scan_manifest(root, result);
  }
  std::sort(result.samples.begin(), result.samples.end(),
            [](const SampleDescriptor& a, const SampleDescriptor& b) { return a.path < b.path; });
  std::sort(result.skipped.begin(), result.skipped.end(),
            [](const SkippedFile& a, const SkippedFile& b) { return a.path < b.path; });
  if (result.samples.empty()) result.warnings.push_back("no images found under " + root.string());
  return result;
}

std::vector<SampleDescriptor> filter_magnification(const std::vector<SampleDescriptor>& samples,
                                                   const std::string& token) {
  const auto mag = magnification_index(token);
  if (!mag) throw ConfigError("unknown magnification '" + token + "' (known: 40X, 100X, 200X, 400X)");
  std::vector<SampleDescriptor> out;
  for (const auto& s : samples) {
    if (s.magnification == kMagnifications[*mag]) out.push_back(s);
  }
  return out;
}

Sample load_sample(const SampleDescriptor& d, std::size_t resolution) {
  const Image image = decode_png(d.path);
  return {to_tensor(image, resolution, resolution), d.label, d.class_name, d.magnification, d.path};
}

std::size_t decode_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MULTINET_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

std::vector<Sample> load_samples(const std::vector<SampleDescriptor>& ds, std::size_t resolution) {
  std::vector<Sample> out(ds.size());
  const std::size_t workers = std::min(decode_threads(), std::max<std::size_t>(ds.size(), 1));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < ds.size(); i += workers) out[i] = load_sample(ds[i], resolution);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// --- splits -----------------------------------------------------------------

SplitRatios parse_ratios(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), '/', ' ');
  std::replace(s.begin(), s.end(), ',', ' ');
  std::replace(s.begin(), s.end(), ':', ' ');
  std::istringstream in(s);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof() || v.size() != 3) throw ConfigError("split '" + text + "' must list three ratios, e.g. 70/15/15");
  double total = v[0] + v[1] + v[2];
  if (std::abs(total - 100.0) < 1e-6) {
    for (auto& r : v) r /= 100.0;
    total = 1.0;
  }
  if (std::any_of(v.begin(), v.end(), [](double r) { return r < 0.0; }) || std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split ratios " + text + " must be non-negative and sum to 1");
  }
  return {v[0], v[1], v[2]};
}

namespace {

std::array<std::size_t, 3> largest_remainder(std::size_t n, const std::array<double, 3>& r) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double ideal = static_cast<double>(n) * r[s];
    counts[s] = static_cast<std::size_t>(std::floor(ideal + 1e-9));
    frac[s] = ideal - static_cast<double>(counts[s]);
    assigned += counts[s];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < 3; ++s) {
      if (frac[s] > frac[best]) best = s;
    }
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace

DatasetSplit split_dataset(const std::vector<SampleDescriptor>& samples, const SplitRatios& ratios,
                           std::uint64_t seed) {
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  if (std::any_of(r.begin(), r.end(), [](double x) { return x < 0.0; }) ||
      std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  const auto active = static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](double x) { return x > 0.0; }));

  std::map<std::size_t, std::vector<SampleDescriptor>> by_class;
  for (const auto& s : samples) by_class[s.label].push_back(s);

  DatasetSplit out;
  out.seed = seed;
  out.ratios = ratios;
  std::array<std::vector<SampleDescriptor>*, 3> dest = {&out.train, &out.val, &out.test};
  std::mt19937_64 rng(seed);
  for (auto& [label, members] : by_class) {
    if (members.size() < active) {
      throw DataError("class " + members.front().class_name + " has " + std::to_string(members.size()) +
                      " samples, fewer than the " + std::to_string(active) + " requested splits");
    }
    // Cells ordered by magnification, path-sorted then shuffled within a cell.
    std::stable_sort(members.begin(), members.end(), [](const SampleDescriptor& a, const SampleDescriptor& b) {
      const auto ma = magnification_index(a.magnification).value_or(0);
      const auto mb = magnification_index(b.magnification).value_or(0);
      return ma != mb ? ma < mb : a.path < b.path;
    });
    for (std::size_t begin = 0; begin < members.size();) {
      std::size_t end = begin;
      while (end < members.size() && members[end].magnification == members[begin].magnification) ++end;
      std::shuffle(members.begin() + static_cast<std::ptrdiff_t>(begin),
                   members.begin() + static_cast<std::ptrdiff_t>(end), rng);
      begin = end;
    }
    // Interleave the class quota evenly so each magnification gets its share.
    const auto quota = largest_remainder(members.size(), r);
    std::array<std::size_t, 3> given{};
    const double n = static_cast<double>(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      std::size_t pick = 3;
      double best_deficit = 0.0;
      for (std::size_t s = 0; s < 3; ++s) {
        if (given[s] >= quota[s]) continue;
        const double deficit = static_cast<double>(i + 1) * static_cast<double>(quota[s]) / n -
                               static_cast<double>(given[s]);
        if (pick == 3 || deficit > best_deficit) {
          pick = s;
          best_deficit = deficit;
        }
      }
      ++given[pick];
      dest[pick]->push_back(members[i]);
    }
  }
  auto by_path = [](const SampleDescriptor& a, const SampleDescriptor& b) { return a.path < b.path; };
  for (auto* d : dest) std::sort(d->begin(), d->end(), by_path);
  return out;
}

nlohmann::json split_record(const DatasetSplit& split) {
  nlohmann::json record;
  record["seed"] = split.seed;
  record["ratios"] = {{"train", split.ratios.train}, {"val", split.ratios.val}, {"test", split.ratios.test}};
  nlohmann::json strat = nlohmann::json::object();
  auto add = [&](const std::vector<SampleDescriptor>& part, const char* name) {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& s : part) {
      paths.push_back(s.path);
      auto& cell = strat[s.class_name][s.magnification];
      if (cell.is_null()) cell = {{"train", 0}, {"val", 0}, {"test", 0}};
      cell[name] = cell[name].get<std::size_t>() + 1;
    }
    record[name] = paths;
  };
  add(split.train, "train");
  add(split.val, "val");
  add(split.test, "test");
  record["stratification"] = strat;
  return record;
}

}  // namespace multinet
