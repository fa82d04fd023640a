#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "softcache/catalog.hpp"
#include "softcache/csv.hpp"
#include "softcache/errors.hpp"

// File-based construction of the catalog and relation model, plus the
// inverse: writing a dataset bundle back out. Numbers are serialized with
// shortest-round-trip formatting, so ingest(write(ingest(x))) reproduces the
// exact same model bit for bit.

namespace softcache::catalog {

inline const std::vector<std::string>& contents_csv_header() {
  static const std::vector<std::string> h{"id", "popularity", "size_bytes"};
  return h;
}
inline const std::vector<std::string>& relations_csv_header() {
  static const std::vector<std::string> h{"src", "dst", "utility"};
  return h;
}

struct IngestResult {
  Catalog catalog;
  UtilityModel utility;
};

/// Reads a content file (`id,popularity,size_bytes`; ids must be a
/// permutation of 0..K-1) and a directed relations file (`src,dst,utility`
/// with utilities in [0,1]); popularity is normalized into request
/// probabilities shared by all users. Duplicate relations, self relations and
/// unknown ids are rejected.
inline IngestResult ingest_catalog(const std::string& content_file,
                                   const std::string& relations_file) {
  std::ifstream cin_file(content_file);
  if (!cin_file) throw ConfigError("cannot open '" + content_file + "'");
  CsvReader contents(cin_file, contents_csv_header(), content_file);

  std::vector<std::string> f;
  std::vector<double> popularity, sizes;
  std::vector<bool> seen_id;
  std::size_t rows = 0;
  while (contents.next(f)) {
    const long id = parse_int(f[0], contents.line());
    const double pop = parse_double(f[1], contents.line());
    const double size = parse_double(f[2], contents.line());
    if (id < 0)
      throw ValidationError(content_file + ": negative content id (line " +
                            std::to_string(contents.line()) + ")");
    const auto uid = static_cast<std::size_t>(id);
    if (uid >= seen_id.size()) {
      seen_id.resize(uid + 1, false);
      popularity.resize(uid + 1, 0.0);
      sizes.resize(uid + 1, 0.0);
    }
    if (seen_id[uid])
      throw ValidationError(content_file + ": duplicate content id " + f[0] +
                            " (line " + std::to_string(contents.line()) + ")");
    seen_id[uid] = true;
    popularity[uid] = pop;
    sizes[uid] = size;
    ++rows;
  }
  if (rows == 0) throw ValidationError(content_file + ": no contents");
  if (rows != seen_id.size())
    throw ValidationError(content_file + ": content ids must cover 0.." +
                          std::to_string(seen_id.size() - 1) + " without gaps");

  Catalog cat = Catalog::shared_demand(std::move(popularity), std::move(sizes));
  const auto K = static_cast<long>(cat.num_contents());
  UtilityModel model = UtilityModel::average(cat.num_contents());

  if (relations_file.empty())  // contents-only ingestion: no relations
    return IngestResult{std::move(cat), std::move(model)};
  std::ifstream rin_file(relations_file);
  if (!rin_file) throw ConfigError("cannot open '" + relations_file + "'");
  CsvReader relations(rin_file, relations_csv_header(), relations_file);
  std::set<std::pair<long, long>> seen_edge;
  while (relations.next(f)) {
    const long src = parse_int(f[0], relations.line());
    const long dst = parse_int(f[1], relations.line());
    const double u = parse_double(f[2], relations.line());
    const std::string where = " (line " + std::to_string(relations.line()) + ")";
    if (src < 0 || src >= K || dst < 0 || dst >= K)
      throw ValidationError(relations_file + ": relation references unknown id" + where);
    if (src == dst)
      throw ValidationError(relations_file +
                            ": self relation rejected, the diagonal is implicit" + where);
    if (!seen_edge.insert({src, dst}).second)
      throw ValidationError(relations_file + ": duplicate relation " + f[0] + "->" +
                            f[1] + where);
    if (!(u >= 0.0 && u <= 1.0))
      throw ValidationError(relations_file + ": utility " + f[2] +
                            " outside [0,1]" + where);
    model.add_relation(static_cast<ContentId>(src), static_cast<ContentId>(dst), u);
  }
  return IngestResult{std::move(cat), std::move(model)};
}

inline void write_contents_csv(std::ostream& out, const Catalog& cat) {
  if (cat.raw_popularity().empty())
    throw ContractError("only shared-demand catalogs can be serialized");
  CsvWriter w(out);
  w.row(contents_csv_header());
  for (std::size_t k = 0; k < cat.num_contents(); ++k)
    w.row({std::to_string(k), format_double(cat.raw_popularity()[k]),
           format_double(cat.sizes()[k])});
}

inline void write_relations_csv(std::ostream& out, const UtilityModel& model) {
  if (model.variant() != UtilityVariant::Average)
    throw ContractError("only averaged relation models can be serialized");
  CsvWriter w(out);
  w.row(relations_csv_header());
  for (ContentId k = 0; k < model.num_contents(); ++k)
    for (const auto& e : model.out_edges(0, k))
      w.row({std::to_string(k), std::to_string(e.other), format_double(e.value)});
}

/// Writes `contents.csv` and `relations.csv` into `dir` (created if needed).
/// Returns the two file paths.
inline std::pair<std::string, std::string> write_catalog_bundle(
    const std::string& dir, const Catalog& cat, const UtilityModel& model) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory '" + dir + "': " + ec.message());
  const std::string cpath = (fs::path(dir) / "contents.csv").string();
  const std::string rpath = (fs::path(dir) / "relations.csv").string();
  {
    std::ofstream out(cpath);
    if (!out) throw ConfigError("cannot write '" + cpath + "'");
    write_contents_csv(out, cat);
  }
  {
    std::ofstream out(rpath);
    if (!out) throw ConfigError("cannot write '" + rpath + "'");
    write_relations_csv(out, model);
  }
  return {cpath, rpath};
}

/// Mean number of positive off-diagonal relations per content.
inline double mean_related_degree(const UtilityModel& model) {
  return model.mean_related_degree();
}

}  // namespace softcache::catalog

namespace softcache {
using catalog::ingest_catalog;
using catalog::IngestResult;
using catalog::mean_related_degree;
using catalog::write_catalog_bundle;
using catalog::write_contents_csv;
using catalog::write_relations_csv;
}  // namespace softcache
