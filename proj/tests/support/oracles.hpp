#pragma once

// Reference implementations used only by tests. They favour obviousness over
// speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::vector<std::string> ngram_at(const std::vector<std::string>& toks, std::size_t i, std::size_t n) {
  return {toks.begin() + static_cast<std::ptrdiff_t>(i), toks.begin() + static_cast<std::ptrdiff_t>(i + n)};
}

inline std::size_t occurrences(const std::vector<std::string>& toks, const std::vector<std::string>& gram) {
  std::size_t c = 0;
  const std::size_t n = gram.size();
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    if (ngram_at(toks, i, n) == gram) ++c;
  return c;
}

struct Bleu {
  double score = 0.0;
  double bp = 0.0;
};

// Corpus BLEU-4 over whitespace tokens by quadratic n-gram scanning. Orders
// without any hypothesis n-gram are left out of the mean; any zero
// precision among the rest gives 0.
inline Bleu bleu(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  double matches[4] = {0, 0, 0, 0};
  double totals[4] = {0, 0, 0, 0};
  double hlen = 0, rlen = 0;
  for (std::size_t p = 0; p < hyp.size(); ++p) {
    const auto h = words(hyp[p]);
    const auto r = words(ref[p]);
    hlen += static_cast<double>(h.size());
    rlen += static_cast<double>(r.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      if (h.size() < n) continue;
      std::vector<std::vector<std::string>> seen;
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        auto g = ngram_at(h, i, n);
        totals[n - 1] += 1;
        if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
        seen.push_back(g);
        matches[n - 1] += static_cast<double>(std::min(occurrences(h, g), occurrences(r, g)));
      }
    }
  }
  Bleu b;
  if (hlen == 0) return b;
  b.bp = hlen >= rlen ? 1.0 : std::exp(1.0 - rlen / hlen);
  double logs = 0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (totals[n] == 0) continue;
    if (matches[n] == 0) return b;
    logs += std::log(matches[n] / totals[n]);
    ++orders;
  }
  if (orders == 0) return b;
  b.score = 100.0 * b.bp * std::exp(logs / orders);
  return b;
}

inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

// argmax_y sum_t u(y, t), first index on ties.
inline std::size_t mbr_argmax(const std::vector<std::string>& cands,
                              const std::function<double(const std::string&, const std::string&)>& u) {
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < cands.size(); ++y) {
    double v = 0;
    for (std::size_t t = 0; t < cands.size(); ++t) v += u(cands[y], cands[t]);
    if (v > best_v) {
      best_v = v;
      best = y;
    }
  }
  return best;
}

inline std::string join(const std::vector<std::string>& v, std::size_t b, std::size_t c) {
  std::string s;
  for (std::size_t k = 0; k < c; ++k) {
    if (k) s += ' ';
    s += v[b + k];
  }
  return s;
}

// Best total similarity over every monotone sequence of 1-1, 1-2, 2-1 links
// and single-sentence skips, by explicit enumeration.
inline double best_alignment_total(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                                   const std::function<double(const std::string&, const std::string&)>& sim) {
  double best = -std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    if (i == hyp.size() && j == ref.size()) {
      best = std::max(best, acc);
      return;
    }
    const std::size_t hl = hyp.size() - i, rl = ref.size() - j;
    if (hl >= 1 && rl >= 1) walk(i + 1, j + 1, acc + sim(hyp[i], ref[j]));
    if (hl >= 1 && rl >= 2) walk(i + 1, j + 2, acc + sim(hyp[i], join(ref, j, 2)));
    if (hl >= 2 && rl >= 1) walk(i + 2, j + 1, acc + sim(join(hyp, i, 2), ref[j]));
    if (hl >= 1) walk(i + 1, j, acc);
    if (rl >= 1) walk(i, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

// Token totals of SLIDE windows: window starts 0, stride, ... while the
// window ends before the document does, then one window flush with the end;
// units entirely inside a window count; identical consecutive windows merge.
inline std::vector<std::size_t> slide_window_sums(const std::vector<std::size_t>& lens, std::size_t window,
                                                  std::size_t stride) {
  std::size_t total = 0;
  for (auto l : lens) total += l;
  std::vector<std::size_t> starts;
  if (total <= window) {
    starts = {0};
  } else {
    for (std::size_t s = 0; s + window < total; s += stride) starts.push_back(s);
    starts.push_back(total - window);
  }
  std::vector<std::vector<std::size_t>> prev;
  std::vector<std::size_t> sums;
  std::vector<std::size_t> last;
  for (auto s : starts) {
    std::vector<std::size_t> members;
    std::size_t pos = 0, covering = lens.size();
    for (std::size_t i = 0; i < lens.size(); ++i) {
      if (pos >= s && pos + lens[i] <= s + window) members.push_back(i);
      if (covering == lens.size() && pos <= s && s < pos + lens[i]) covering = i;
      pos += lens[i];
    }
    if (members.empty() && covering < lens.size()) members.push_back(covering);
    if (members.empty() || members == last) continue;
    last = members;
    std::size_t sum = 0;
    for (auto i : members) sum += lens[i];
    sums.push_back(sum);
  }
  return sums;
}

}  // namespace oracle
