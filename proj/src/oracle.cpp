#include "gamacro/oracle.hpp"

#include <stdexcept>

namespace gamacro::oracle {

int bit_count(std::uint32_t b) {
  int c = 0;
  for (; b; b &= b - 1) ++c;
  return c;
}

namespace {

using Dense = std::vector<double>;

// Position-by-position factor list of a blade.
std::vector<int> factors_of(std::uint32_t b) {
  std::vector<int> f;
  for (int i = 0; b; ++i, b >>= 1)
    if (b & 1) f.push_back(i);
  return f;
}

// e_i ^ E_b: move e_i past the factors of b that precede it.
void wedge_vector(int i, std::uint32_t b, double c, Dense& out) {
  std::uint32_t bit = 1u << i;
  if (b & bit) return;
  int before = 0;
  for (int f : factors_of(b))
    if (f < i) ++before;
  out[b | bit] += (before % 2 ? -c : c);
}

// e_i . E_b: sum over factors with alternating sign, metric from the form.
void contract_vector(int i, std::uint32_t b, double c, const std::vector<std::vector<double>>& g, Dense& out) {
  auto f = factors_of(b);
  for (std::size_t m = 0; m < f.size(); ++m) {
    double w = g[i][f[m]];
    if (w == 0.0) continue;
    out[b & ~(1u << f[m])] += (m % 2 ? -c : c) * w;
  }
}

// e_i * X for a dense X.
Dense vector_times(int i, const Dense& x, const std::vector<std::vector<double>>& g) {
  Dense out(x.size(), 0.0);
  for (std::uint32_t b = 0; b < x.size(); ++b) {
    if (x[b] == 0.0) continue;
    contract_vector(i, b, x[b], g, out);
    wedge_vector(i, b, x[b], out);
  }
  return out;
}

}  // namespace

NumFrame::NumFrame(std::vector<std::vector<double>> form) : n_(static_cast<int>(form.size())), form_(std::move(form)) {
  if (n_ < 1 || n_ > kMaxDim) throw std::invalid_argument("oracle frames support 1..8 basis vectors");
  for (const auto& r : form_)
    if (static_cast<int>(r.size()) != n_) throw std::invalid_argument("bilinear form must be square");
  const std::uint32_t sz = size();
  // gp(E_a, X) for every blade a, built by peeling the lowest factor:
  // e_i ^ A' = e_i A' - e_i . A'
  std::vector<std::vector<Dense>> left(sz);  // left[a][b] = E_a E_b dense
  for (std::uint32_t b = 0; b < sz; ++b) {
    left[0].emplace_back(sz, 0.0);
    left[0][b][b] = 1.0;
  }
  for (std::uint32_t a = 1; a < sz; ++a) {
    int i = 0;
    while (!((a >> i) & 1)) ++i;
    std::uint32_t rest = a & ~(1u << i);
    // e_i . E_rest (as a multivector over blades)
    Dense dot(sz, 0.0);
    contract_vector(i, rest, 1.0, form_, dot);
    left[a].resize(sz);
    for (std::uint32_t b = 0; b < sz; ++b) {
      Dense v = vector_times(i, left[rest][b], form_);
      for (std::uint32_t c = 0; c < sz; ++c) {
        if (dot[c] == 0.0) continue;
        for (std::uint32_t d = 0; d < sz; ++d) v[d] -= dot[c] * left[c][b][d];
      }
      left[a][b] = std::move(v);
    }
  }
  table_.resize(std::size_t{sz} * sz);
  for (std::uint32_t a = 0; a < sz; ++a)
    for (std::uint32_t b = 0; b < sz; ++b)
      for (std::uint32_t d = 0; d < sz; ++d)
        if (left[a][b][d] != 0.0) table_[(std::size_t{a} << n_) | b].emplace_back(d, left[a][b][d]);
}

double NumMultivector::max_abs() const {
  double m = 0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

bool keep(Product k, int ga, int gb, int gr) {
  switch (k) {
    case Product::gp: return true;
    case Product::op: return gr == ga + gb;
    case Product::sp: return gr == 0;
    case Product::lcp: return ga <= gb && gr == gb - ga;
    case Product::rcp: return ga >= gb && gr == ga - gb;
    case Product::fdp: return gr == (ga > gb ? ga - gb : gb - ga);
    case Product::hip: return ga > 0 && gb > 0 && gr == (ga > gb ? ga - gb : gb - ga);
    default: return false;
  }
}

}  // namespace

NumMultivector product(Product k, const NumMultivector& a, const NumMultivector& b) {
  if (a.frame() != b.frame()) throw std::invalid_argument("FrameMismatch");
  if (k == Product::cp || k == Product::acp) {
    NumMultivector ab = product(Product::gp, a, b), ba = product(Product::gp, b, a);
    return k == Product::cp ? 0.5 * (ab - ba) : 0.5 * (ab + ba);
  }
  const NumFrame& f = *a.frame();
  NumMultivector r(a.frame());
  for (std::uint32_t x = 0; x < f.size(); ++x) {
    if (a[x] == 0.0) continue;
    for (std::uint32_t y = 0; y < f.size(); ++y) {
      if (b[y] == 0.0) continue;
      int gx = bit_count(x), gy = bit_count(y);
      for (const auto& [d, c] : f.gp(x, y))
        if (keep(k, gx, gy, bit_count(d))) r[d] += a[x] * b[y] * c;
    }
  }
  return r;
}

NumMultivector operator+(const NumMultivector& a, const NumMultivector& b) {
  NumMultivector r = a;
  for (std::uint32_t i = 0; i < a.frame()->size(); ++i) r[i] += b[i];
  return r;
}

NumMultivector operator-(const NumMultivector& a, const NumMultivector& b) { return a + (-1.0) * b; }

NumMultivector operator*(double s, const NumMultivector& a) {
  NumMultivector r = a;
  for (std::uint32_t i = 0; i < a.frame()->size(); ++i) r[i] *= s;
  return r;
}

namespace {

template <class F>
NumMultivector sign_map(const NumMultivector& a, F&& f) {
  NumMultivector r = a;
  for (std::uint32_t i = 0; i < a.frame()->size(); ++i)
    if (f(bit_count(i))) r[i] = -r[i];
  return r;
}

}  // namespace

NumMultivector reverse(const NumMultivector& a) {
  return sign_map(a, [](int k) { return (k * (k - 1) / 2) % 2 == 1; });
}
NumMultivector grade_involution(const NumMultivector& a) {
  return sign_map(a, [](int k) { return k % 2 == 1; });
}
NumMultivector clifford_conjugate(const NumMultivector& a) {
  return sign_map(a, [](int k) { return (k * (k + 1) / 2) % 2 == 1; });
}

NumMultivector grade_part(const NumMultivector& a, int k) {
  NumMultivector r(a.frame());
  for (std::uint32_t i = 0; i < a.frame()->size(); ++i)
    if (bit_count(i) == k) r[i] = a[i];
  return r;
}

double quasi_norm2(const NumMultivector& a) { return product(Product::gp, a, reverse(a))[0]; }

NumMultivector versor_inverse(const NumMultivector& a) {
  double n = quasi_norm2(a);
  if (std::abs(n) < 1e-14) throw std::domain_error("NullVersor");
  return (1.0 / n) * reverse(a);
}

}  // namespace gamacro::oracle
