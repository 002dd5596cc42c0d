#pragma once

// Independent reference implementations used to cross-check the library.
// They favour obviousness over speed and share no code with src/.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/metrics.hpp"
#include "eae/qa.hpp"

namespace eae::oracle {

inline std::u32string to_u32(const std::string& s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline std::string to_u8(const std::u32string& s) {
  std::string out;
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  return out;
}

struct Cand {
  std::size_t start, end;
  std::string text;
  double score;
};

// Enumerates every (i, j), keeps the best-scoring pair per string (earliest
// pair on ties), then orders by score, start and end.
inline std::pair<std::vector<Cand>, double> decode(const std::vector<double>& s,
                                                   const std::vector<double>& e,
                                                   const std::vector<TokenOffset>& off,
                                                   const std::string& text, std::size_t k,
                                                   std::size_t max_len) {
  const auto u = to_u32(text);
  std::vector<Cand> all;
  for (std::size_t i = 1; i < s.size(); ++i) {
    for (std::size_t j = i; j < s.size(); ++j) {
      if (j - i + 1 > max_len) continue;
      if (off[i].start >= off[j].end || s[i] * e[j] <= 0.0) continue;
      all.push_back({off[i].start, off[j].end,
                     to_u8(u.substr(off[i].start, off[j].end - off[i].start)), s[i] * e[j]});
    }
  }
  std::vector<Cand> unique;
  for (const auto& c : all) {
    auto it = std::find_if(unique.begin(), unique.end(), [&](const Cand& x) { return x.text == c.text; });
    if (it == unique.end()) {
      unique.push_back(c);
    } else if (c.score > it->score) {
      *it = c;
    }
  }
  std::stable_sort(unique.begin(), unique.end(), [](const Cand& a, const Cand& b) {
    return std::tie(b.score, a.start, a.end) < std::tie(a.score, b.start, b.end);
  });
  if (unique.size() > k) unique.resize(k);
  return {unique, s[0] * e[0]};
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n\r\f\v");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\n\r\f\v");
  return s.substr(b, e - b + 1);
}

struct Tally {
  std::size_t tp = 0, pred = 0, gold = 0;
  double f1() const {
    if (pred == 0 && gold == 0) return 1.0;
    const double p = pred ? double(tp) / pred : 0.0;
    const double r = gold ? double(tp) / gold : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
};

// Greedy one-to-one matching of predicted strings to gold strings per
// (document, event, role).
inline Tally count(const PredictionSet& pred, const Corpus& gold) {
  Tally t;
  for (const auto& doc : gold.documents) {
    for (const auto& ev : doc.events) {
      std::map<std::string, std::vector<std::string>> g;
      for (const auto& a : ev.arguments) g[a.role].push_back(trim(a.text));
      std::map<std::string, std::vector<std::string>> p;
      auto it = pred.events.find(EventKey{doc.doc_id, ev.event_id});
      if (it != pred.events.end()) {
        for (const auto& [role, list] : it->second) {
          for (const auto& s : list) p[role].push_back(trim(s));
        }
      }
      for (auto& [role, list] : g) t.gold += list.size();
      for (auto& [role, list] : p) {
        t.pred += list.size();
        std::vector<bool> used(g[role].size(), false);
        for (const auto& s : list) {
          for (std::size_t k = 0; k < g[role].size(); ++k) {
            if (!used[k] && g[role][k] == s) {
              used[k] = true;
              ++t.tp;
              break;
            }
          }
        }
      }
    }
  }
  return t;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

struct SweepRow {
  int percentile;
  double threshold;
  double f1;
};

// Recomputes the 19-point percentile sweep from scratch.
inline std::pair<double, std::vector<SweepRow>> sweep(const std::vector<RoleCandidates>& dev,
                                                      const Corpus& gold, std::size_t k) {
  std::vector<double> pool;
  for (const auto& rc : dev) {
    for (std::size_t i = 0; i < rc.decoded.candidates.size() && i < k; ++i) {
      pool.push_back(rc.decoded.candidates[i].confidence);
    }
  }
  std::sort(pool.begin(), pool.end());
  std::vector<SweepRow> rows;
  for (int p = 5; p <= 95; p += 5) {
    auto rank = static_cast<long>(std::ceil(p / 100.0 * pool.size() - 1e-9));
    rank = std::max(1L, std::min<long>(rank, static_cast<long>(pool.size())));
    const double t = pool[rank - 1];
    PredictionSet pred;
    for (const auto& rc : dev) {
      auto& list = pred.events[EventKey{rc.doc_id, rc.event_id}][rc.role];
      const double bar = std::max(t, rc.decoded.null_confidence);
      for (const auto& c : rc.decoded.candidates) {
        if (list.size() < k && c.confidence > bar) list.push_back(c.text);
      }
    }
    rows.push_back({p, t, count(pred, gold).f1()});
  }
  double best_f1 = -1, best_t = 0;
  for (const auto& r : rows) {
    if (r.f1 > best_f1 || (r.f1 == best_f1 && r.threshold > best_t)) {
      best_f1 = r.f1;
      best_t = r.threshold;
    }
  }
  return {best_t, rows};
}

}  // namespace eae::oracle
