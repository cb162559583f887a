#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "multicheb/errors.hpp"
#include "multicheb/sdp.hpp"

namespace multicheb::sdp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// (matno, block, i, j) with 1-based block and indices, i <= j.
using Key = std::tuple<int, int, int, int>;

}  // namespace

std::string export_sdpa(const SdpProblem& problem) {
  problem.validate();
  const int m = problem.num_rows();
  if (m == 0) throw InvalidInput("export_sdpa: the format needs at least one constraint row");
  const int nb = problem.num_blocks();

  // Work on the normalized pair: max rhs.y with S = C - sum y_i A_i.
  const bool negate_cost = problem.side == Side::primal && problem.sense == Sense::maximize;
  const bool negate_rhs = problem.side == Side::dual && problem.sense == Sense::minimize;
  const double cs = negate_cost ? -1.0 : 1.0;
  const double bs = negate_rhs ? -1.0 : 1.0;

  std::map<Key, double> entries;
  auto put = [&](int mat, int blk, int r, int c, double v) {
    if (r > c) std::swap(r, c);
    entries[{mat, blk, r + 1, c + 1}] += v;
  };
  for (const auto& e : problem.cost.matrix_terms) put(0, e.block + 1, e.row, e.col, -cs * e.value);
  for (int i = 0; i < m; ++i)
    for (const auto& e : problem.rows[i].matrix_terms) put(i + 1, e.block + 1, e.row, e.col, -e.value);

  const int k = problem.num_free;
  if (k > 0) {
    // sum_i y_i b_ij - c_j >= 0 and <= 0, as entries 2j and 2j+1.
    const int blk = nb + 1;
    std::vector<double> c(k, 0.0);
    for (const auto& [j, v] : problem.cost.free_terms) c[j] += cs * v;
    for (int j = 0; j < k; ++j) {
      put(0, blk, 2 * j, 2 * j, c[j]);
      put(0, blk, 2 * j + 1, 2 * j + 1, -c[j]);
    }
    for (int i = 0; i < m; ++i) {
      for (const auto& [j, v] : problem.rows[i].free_terms) {
        put(i + 1, blk, 2 * j, 2 * j, v);
        put(i + 1, blk, 2 * j + 1, 2 * j + 1, -v);
      }
    }
  }

  std::string out;
  out += std::to_string(m) + "\n";
  out += std::to_string(nb + (k > 0 ? 1 : 0)) + "\n";
  for (int b = 0; b < nb; ++b) out += (b ? " " : "") + std::to_string(problem.block_sizes[b]);
  if (k > 0) out += (nb ? " " : "") + std::to_string(-2 * k);
  out += "\n";
  for (int i = 0; i < m; ++i) out += (i ? " " : "") + fmt(-bs * problem.rhs[i]);
  out += "\n";
  for (const auto& [key, v] : entries) {
    if (v == 0.0) continue;
    const auto& [mat, blk, r, c] = key;
    out += std::to_string(mat) + " " + std::to_string(blk) + " " + std::to_string(r) + " " +
           std::to_string(c) + " " + fmt(v) + "\n";
  }
  return out;
}

void write_sdpa(const SdpProblem& problem, std::ostream& out) {
  out << export_sdpa(problem);
  if (!out) throw std::runtime_error("write_sdpa: write failed");
}

SdpProblem parse_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  // Skip leading comment lines, then read the three header items; the
  // objective vector may span lines, so collect tokens from there on.
  std::vector<std::string> tokens;
  bool started = false;
  while (std::getline(in, line)) {
    if (!started && (line.empty() || line[0] == '"' || line[0] == '*')) continue;
    started = true;
    for (char& ch : line)
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  std::size_t pos = 0;
  auto next_int = [&](const char* what) {
    if (pos >= tokens.size()) throw InvalidInput(std::string("parse_sdpa: missing ") + what);
    try {
      std::size_t used = 0;
      double v = std::stod(tokens[pos], &used);
      if (used != tokens[pos].size() || v != std::floor(v)) throw std::invalid_argument("");
      ++pos;
      return static_cast<int>(v);
    } catch (const std::exception&) {
      throw InvalidInput(std::string("parse_sdpa: bad ") + what + " '" + tokens[pos] + "'");
    }
  };
  auto next_real = [&](const char* what) {
    if (pos >= tokens.size()) throw InvalidInput(std::string("parse_sdpa: missing ") + what);
    try {
      std::size_t used = 0;
      double v = std::stod(tokens[pos], &used);
      if (used != tokens[pos].size() || !std::isfinite(v)) throw std::invalid_argument("");
      ++pos;
      return v;
    } catch (const std::exception&) {
      throw InvalidInput(std::string("parse_sdpa: bad ") + what + " '" + tokens[pos] + "'");
    }
  };

  const int m = next_int("constraint count");
  const int nblocks = next_int("block count");
  if (m < 1 || nblocks < 1) throw InvalidInput("parse_sdpa: counts must be positive");
  std::vector<int> sizes(nblocks);
  for (auto& s : sizes) {
    s = next_int("block size");
    if (s == 0) throw InvalidInput("parse_sdpa: zero block size");
  }
  std::vector<double> cvec(m);
  for (auto& v : cvec) v = next_real("objective entry");

  // F[mat][blk] -> (i, j) -> value, 0-based.
  std::map<std::tuple<int, int, int, int>, double> F;
  while (pos < tokens.size()) {
    int mat = next_int("matrix number");
    int blk = next_int("block number");
    int r = next_int("row");
    int c = next_int("column");
    double v = next_real("value");
    if (mat < 0 || mat > m) throw InvalidInput("parse_sdpa: matrix number out of range");
    if (blk < 1 || blk > nblocks) throw InvalidInput("parse_sdpa: block number out of range");
    const int s = std::abs(sizes[blk - 1]);
    if (r < 1 || r > s || c < 1 || c > s) throw InvalidInput("parse_sdpa: entry index out of range");
    if (r > c) std::swap(r, c);
    if (sizes[blk - 1] < 0 && r != c) throw InvalidInput("parse_sdpa: off-diagonal entry in a diagonal block");
    F[{mat, blk - 1, r - 1, c - 1}] += v;
  }

  // A trailing diagonal block of opposite pairs encodes free scalars.
  int free_block = -1;
  const int last = nblocks - 1;
  if (sizes[last] < 0 && (-sizes[last]) % 2 == 0) {
    std::map<std::pair<int, int>, double> diag;
    for (const auto& [key, v] : F)
      if (std::get<1>(key) == last) diag[{std::get<0>(key), std::get<2>(key)}] = v;
    bool pairs = true;
    for (const auto& [key, v] : diag) {
      const int partner = key.second ^ 1;
      auto it = diag.find({key.first, partner});
      if (it == diag.end() || it->second != -v) {
        pairs = false;
        break;
      }
    }
    if (pairs) free_block = last;
  }

  SdpProblem p;
  p.side = Side::dual;
  p.sense = Sense::maximize;
  std::vector<std::vector<int>> block_ids(nblocks);
  for (int b = 0; b < nblocks; ++b) {
    if (b == free_block) continue;
    if (sizes[b] > 0) {
      block_ids[b].push_back(p.add_block(sizes[b]));
    } else {
      for (int j = 0; j < -sizes[b]; ++j) block_ids[b].push_back(p.add_block(1));
    }
  }
  if (free_block >= 0) p.add_free(-sizes[free_block] / 2);

  p.rows.resize(m);
  p.rhs.resize(m);
  for (int i = 0; i < m; ++i) p.rhs[i] = -cvec[i];
  for (const auto& [key, v] : F) {
    const auto& [mat, blk, r, c] = key;
    if (blk == free_block) {
      if (r % 2 != 0) continue;
      if (mat == 0)
        p.cost.add_free(r / 2, v);
      else
        p.rows[mat - 1].add_free(r / 2, v);
      continue;
    }
    int b = sizes[blk] > 0 ? block_ids[blk][0] : block_ids[blk][r];
    int rr = sizes[blk] > 0 ? r : 0, cc = sizes[blk] > 0 ? c : 0;
    if (mat == 0)
      p.cost.add_matrix(b, rr, cc, -v);
    else
      p.rows[mat - 1].add_matrix(b, rr, cc, -v);
  }
  return p;
}

}  // namespace multicheb::sdp
