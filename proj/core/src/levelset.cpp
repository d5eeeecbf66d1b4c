#include "levelset.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace lamespec::detail {

namespace {

struct Crossing {
  double x, y;
  int dir;  // 0 horizontal, 1 vertical
};

}  // namespace

std::vector<GridChain> extract_level_set(
    int nx, int ny, bool wrap, const std::vector<double>& vals,
    const std::vector<unsigned char>& mask,
    const std::function<double(double, double)>& f, int refine_iters) {
  const int NX = wrap ? nx : nx + 1;
  const int NY = wrap ? ny : ny + 1;
  auto node = [&](int i, int j) {
    if (wrap) {
      i = ((i % nx) + nx) % nx;
      j = ((j % ny) + ny) % ny;
    }
    return j * NX + i;
  };
  auto valid = [&](int i, int j) { return mask[node(i, j)] != 0; };
  auto value = [&](int i, int j) { return vals[node(i, j)]; };
  auto pos = [&](double v) { return v >= 0.0; };

  // Crossings per edge. Key: dir * BIG + j * (nx + 1) + i.
  const long BIG = static_cast<long>(nx + 1) * (ny + 1) + 7;
  std::map<long, int> edge_to_crossing;
  std::vector<Crossing> crossings;

  auto edge_key = [&](int dir, int i, int j) {
    return static_cast<long>(dir) * BIG + static_cast<long>(j) * (nx + 1) + i;
  };

  auto make_crossing = [&](int dir, int i, int j) -> int {
    if (wrap) {
      i = ((i % nx) + nx) % nx;
      j = ((j % ny) + ny) % ny;
    }
    const long key = edge_key(dir, i, j);
    auto it = edge_to_crossing.find(key);
    if (it != edge_to_crossing.end()) return it->second;
    const int i1 = dir == 0 ? i + 1 : i;
    const int j1 = dir == 0 ? j : j + 1;
    if (!valid(i, j) || !valid(i1, j1)) return -1;
    double v0 = value(i, j), v1 = value(i1, j1);
    if (pos(v0) == pos(v1)) return -1;
    double lo = 0.0, hi = 1.0, flo = v0;
    for (int it2 = 0; it2 < refine_iters; ++it2) {
      const double mid = 0.5 * (lo + hi);
      const double fx = dir == 0 ? i + mid : i;
      const double fy = dir == 0 ? j : j + mid;
      const double fm = f(fx, fy);
      if (pos(fm) == pos(flo)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    // final position: linear interpolation inside the residual bracket
    double t;
    if (hi - lo > 0.4) {  // no refinement requested
      t = v0 / (v0 - v1);
    } else {
      t = 0.5 * (lo + hi);
    }
    Crossing c;
    c.x = dir == 0 ? i + t : i;
    c.y = dir == 0 ? j : j + t;
    c.dir = dir;
    crossings.push_back(c);
    const int id = static_cast<int>(crossings.size()) - 1;
    edge_to_crossing[key] = id;
    return id;
  };

  // Segments per cell.
  std::vector<std::pair<int, int>> segs;
  const int cy = ny;
  const int cx = nx;
  for (int j = 0; j < cy; ++j) {
    for (int i = 0; i < cx; ++i) {
      if (!wrap && (i + 1 > nx || j + 1 > ny)) continue;
      if (!valid(i, j) || !valid(i + 1, j) || !valid(i + 1, j + 1) || !valid(i, j + 1))
        continue;
      const bool s00 = pos(value(i, j));
      const bool s10 = pos(value(i + 1, j));
      const bool s11 = pos(value(i + 1, j + 1));
      const bool s01 = pos(value(i, j + 1));
      const int b = (s00 != s10) ? make_crossing(0, i, j) : -1;
      const int r = (s10 != s11) ? make_crossing(1, i + 1, j) : -1;
      const int t = (s01 != s11) ? make_crossing(0, i, j + 1) : -1;
      const int l = (s00 != s01) ? make_crossing(1, i, j) : -1;
      int present[4];
      int np = 0;
      if (b >= 0) present[np++] = b;
      if (r >= 0) present[np++] = r;
      if (t >= 0) present[np++] = t;
      if (l >= 0) present[np++] = l;
      if (np == 2) {
        segs.emplace_back(present[0], present[1]);
      } else if (np == 4) {
        const double fc = f(i + 0.5, j + 0.5);
        if ((fc >= 0.0) == s00) {
          segs.emplace_back(b, r);
          segs.emplace_back(t, l);
        } else {
          segs.emplace_back(b, l);
          segs.emplace_back(t, r);
        }
      }
    }
  }

  // Adjacency.
  std::vector<std::vector<int>> adj(crossings.size());
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    adj[segs[s].first].push_back(s);
    adj[segs[s].second].push_back(s);
  }
  std::vector<char> seg_used(segs.size(), 0);

  auto other_end = [&](int s, int c) {
    return segs[s].first == c ? segs[s].second : segs[s].first;
  };

  std::vector<GridChain> chains;
  auto walk = [&](int start, int first_seg) {
    GridChain ch;
    double px = crossings[start].x, py = crossings[start].y;
    ch.pts.push_back({px, py});
    int cur = start, s = first_seg;
    while (s >= 0 && !seg_used[s]) {
      seg_used[s] = 1;
      cur = other_end(s, cur);
      double x = crossings[cur].x, y = crossings[cur].y;
      if (wrap) {
        x -= nx * std::round((x - px) / nx);
        y -= ny * std::round((y - py) / ny);
      }
      ch.pts.push_back({x, y});
      px = x;
      py = y;
      if (cur == start) {
        ch.closed = true;
        break;
      }
      s = -1;
      for (int cand : adj[cur])
        if (!seg_used[cand]) {
          s = cand;
          break;
        }
    }
    return ch;
  };

  // Open chains first (ends at masked regions or the window boundary).
  for (int c = 0; c < static_cast<int>(crossings.size()); ++c) {
    if (adj[c].size() == 1 && !seg_used[adj[c][0]])
      chains.push_back(walk(c, adj[c][0]));
  }
  // Remaining cycles.
  for (int c = 0; c < static_cast<int>(crossings.size()); ++c) {
    for (int s : adj[c])
      if (!seg_used[s]) chains.push_back(walk(c, s));
  }
  return chains;
}

}  // namespace lamespec::detail
