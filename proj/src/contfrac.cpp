#include "renormlab/contfrac.hpp"

#include <nlohmann/json.hpp>

namespace renormlab::cf {

namespace {

// Checked 128-bit a*b + c.
int128 mul_add(int128 a, int128 b, int128 c) {
  int128 prod;
  if (__builtin_mul_overflow(a, b, &prod))
    throw error("contfrac.overflow", "convergent exceeds 128-bit width");
  int128 sum;
  if (__builtin_add_overflow(prod, c, &sum))
    throw error("contfrac.overflow", "convergent exceeds 128-bit width");
  return sum;
}

}  // namespace

std::string int128_to_string(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
  std::string s;
  while (u > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  return neg ? "-" + s : s;
}

ContinuedFraction::ContinuedFraction(std::vector<std::int64_t> head,
                                     std::vector<std::int64_t> period)
    : head_(std::move(head)), period_(std::move(period)) {
  for (auto t : head_)
    if (t < 1) throw error("contfrac.invalid_term", "terms must be >= 1");
  for (auto t : period_)
    if (t < 1) throw error("contfrac.invalid_term", "terms must be >= 1");
}

std::size_t ContinuedFraction::available_terms() const {
  return infinite() ? SIZE_MAX : head_.size();
}

std::int64_t ContinuedFraction::term(std::size_t i) const {
  if (i < head_.size()) return head_[i];
  if (period_.empty())
    throw error("contfrac.insufficient_terms",
                "term " + std::to_string(i) + " of a " +
                    std::to_string(head_.size()) + "-term fraction");
  return period_[(i - head_.size()) % period_.size()];
}

Convergent convergents(const ContinuedFraction& cf, std::size_t m) {
  // q_0 = 1, q_1 = r_0, q_{m+1} = r_m q_m + q_{m-1}; p_0 = 0, p_1 = 1.
  int128 p_prev = 0, q_prev = 1;  // (p_0, q_0)
  if (m == 0) return {p_prev, q_prev};
  int128 p = 1, q = cf.term(0);  // (p_1, q_1)
  for (std::size_t k = 1; k < m; ++k) {
    int128 r = cf.term(k);
    int128 pn = mul_add(r, p, p_prev);
    int128 qn = mul_add(r, q, q_prev);
    p_prev = p;
    q_prev = q;
    p = pn;
    q = qn;
  }
  return {p, q};
}

bool is_bounded_type(const ContinuedFraction& cf, std::int64_t B,
                     std::size_t depth) {
  // Periodic tails only need one period's worth of terms.
  std::size_t n = depth;
  if (cf.infinite())
    n = std::min(depth, cf.head_size() + cf.period().size());
  for (std::size_t i = 0; i < n; ++i)
    if (cf.term(i) > B) return false;
  return true;
}

std::vector<std::int64_t> euclid_digits(int128 p, int128 q) {
  if (p < 0 || q <= 0 || p >= q)
    throw error("contfrac.domain", "euclid_digits needs 0 <= p/q < 1");
  std::vector<std::int64_t> out;
  while (p != 0) {
    int128 d = q / p;
    int128 r = q % p;
    out.push_back(static_cast<std::int64_t>(d));
    q = p;
    p = r;
  }
  return out;
}

std::vector<std::int64_t> common_prefix_digits(int128 p1, int128 q1,
                                               int128 p2, int128 q2) {
  auto a = euclid_digits(p1, q1);
  auto b = euclid_digits(p2, q2);
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] != b[i]) break;
    out.push_back(a[i]);
  }
  return out;
}

std::string ContinuedFraction::to_json() const {
  nlohmann::json j;
  j["head"] = head_;
  if (!period_.empty()) j["period"] = period_;
  return j.dump();
}

ContinuedFraction ContinuedFraction::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::vector<std::int64_t> head, period;
  if (j.contains("head")) head = j["head"].get<std::vector<std::int64_t>>();
  if (j.contains("period"))
    period = j["period"].get<std::vector<std::int64_t>>();
  return ContinuedFraction(std::move(head), std::move(period));
}

}  // namespace renormlab::cf
