#include "gamacro/blades.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gamacro/error.hpp"

namespace gamacro {

BladeTerm orthogonal_gp(BladeId a, BladeId b, const std::vector<Number>& diag) {
  Number c(reorder_sign(a, b));
  for (BladeId common = a & b; common != 0; common &= common - 1) {
    c = c * diag[std::countr_zero(common)];
    if (c.is_zero()) break;
  }
  return {a ^ b, c};
}

const char* product_name(ProductKind k) {
  switch (k) {
    case ProductKind::gp: return "gp";
    case ProductKind::op: return "op";
    case ProductKind::sp: return "sp";
    case ProductKind::lcp: return "lcp";
    case ProductKind::rcp: return "rcp";
    case ProductKind::fdp: return "fdp";
    case ProductKind::hip: return "hip";
    case ProductKind::cp: return "cp";
    case ProductKind::acp: return "acp";
  }
  return "?";
}

std::optional<ProductKind> parse_product(const std::string& s) {
  for (auto k : kAllProducts)
    if (s == product_name(k)) return k;
  return std::nullopt;
}

bool keeps_grade(ProductKind k, int ga, int gb, int gr) {
  switch (k) {
    case ProductKind::gp: return true;
    case ProductKind::op: return gr == ga + gb;
    case ProductKind::sp: return gr == 0;
    case ProductKind::lcp: return gb >= ga && gr == gb - ga;
    case ProductKind::rcp: return ga >= gb && gr == ga - gb;
    case ProductKind::fdp: return gr == std::abs(gb - ga);
    case ProductKind::hip: return ga != 0 && gb != 0 && gr == std::abs(gb - ga);
    default: return false;
  }
}

FramePtr Frame::euclidean(std::string name, std::vector<std::string> basis) {
  Matrix m(basis.size(), std::vector<Number>(basis.size(), Number(0)));
  for (std::size_t i = 0; i < basis.size(); ++i) m[i][i] = Number(1);
  return from_ipm(std::move(name), std::move(basis), std::move(m));
}

FramePtr Frame::from_ipm(std::string name, std::vector<std::string> basis, Matrix ipm) {
  const std::size_t n = basis.size();
  if (n == 0 || n > static_cast<std::size_t>(kMaxDim))
    throw Error("FrameTooLarge", "frame '" + name + "' has " + std::to_string(n) + " basis vectors (1.." +
                                     std::to_string(kMaxDim) + " supported)");
  if (ipm.size() != n)
    throw Error("NonSymmetricIPM", "IPM of frame '" + name + "' is not " + std::to_string(n) + "x" + std::to_string(n));
  for (const auto& row : ipm)
    if (row.size() != n)
      throw Error("NonSymmetricIPM", "IPM of frame '" + name + "' is not square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Number &a = ipm[i][j], &b = ipm[j][i];
      bool same = (a.exact() && b.exact()) ? a == b : std::abs(a.value() - b.value()) <= 1e-12;
      if (!same) throw Error("NonSymmetricIPM", "IPM of frame '" + name + "' is not symmetric");
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (basis[i] == basis[j]) throw Error("DuplicateName", "basis vector '" + basis[i] + "' repeated");

  auto f = std::shared_ptr<Frame>(new Frame());
  f->name_ = std::move(name);
  f->basis_ = std::move(basis);
  f->ipm_ = std::move(ipm);
  f->diagonal_ = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && !f->ipm_[i][j].is_zero()) f->diagonal_ = false;
  f->bcm_.assign(n, std::vector<double>(n, 0.0));
  if (f->diagonal_) {
    for (std::size_t i = 0; i < n; ++i) {
      const Number& d = f->ipm_[i][i];
      f->diag_.push_back(d);
      double v = d.value();
      int s = std::abs(v) < 1e-10 ? 0 : (v > 0 ? 1 : -1);
      f->signature_.push_back(s);
      f->bcm_[i][i] = s == 0 ? 1.0 : 1.0 / std::sqrt(std::abs(v));
    }
  } else {
    if (n > static_cast<std::size_t>(kMaxNonOrthogonalDim))
      throw Error("FrameTooLarge", "non-orthogonal frame '" + f->name_ + "' exceeds " +
                                       std::to_string(kMaxNonOrthogonalDim) + " basis vectors");
    f->build_tables();
  }
  return f;
}

void Frame::build_tables() {
  const int n = dim();
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = ipm_[i][j].value();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const auto& q = es.eigenvectors();
  const auto& lam = es.eigenvalues();
  Eigen::MatrixXd b(n, n);
  std::vector<Number> sig_diag;
  for (int k = 0; k < n; ++k) {
    double l = lam(k);
    int s = std::abs(l) < 1e-10 ? 0 : (l > 0 ? 1 : -1);
    signature_.push_back(s);
    sig_diag.push_back(Number(s));
    double scale = s == 0 ? 1.0 : 1.0 / std::sqrt(std::abs(l));
    for (int i = 0; i < n; ++i) b(i, k) = q(i, k) * scale;
  }
  Eigen::MatrixXd binv = b.inverse();
  std::vector<std::vector<double>> to_f(n, std::vector<double>(n)), to_e(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      to_f[i][j] = binv(i, j);
      to_e[i][j] = b(i, j);
      bcm_[i][j] = b(i, j);
    }
  auto img_f = outermorphism_images(to_f, n, n);
  auto img_e = outermorphism_images(to_e, n, n);
  const BladeId count = blade_count();
  gp_.assign(std::size_t{count} * count, {});
  std::vector<double> acc_f(count), acc_e(count);
  for (BladeId a = 0; a < count; ++a)
    for (BladeId bb = 0; bb < count; ++bb) {
      std::fill(acc_f.begin(), acc_f.end(), 0.0);
      for (const auto& [fa, xa] : img_f[a])
        for (const auto& [fb, xb] : img_f[bb]) {
          BladeTerm t = orthogonal_gp(fa, fb, sig_diag);
          if (!t.coef.is_zero()) acc_f[t.blade] += t.coef.value() * xa * xb;
        }
      std::fill(acc_e.begin(), acc_e.end(), 0.0);
      for (BladeId fc = 0; fc < count; ++fc) {
        if (acc_f[fc] == 0.0) continue;
        for (const auto& [ec, y] : img_e[fc]) acc_e[ec] += acc_f[fc] * y;
      }
      auto& cell = gp_[std::size_t{a} * count + bb];
      for (BladeId ec = 0; ec < count; ++ec) {
        Number c = Number::snap(acc_e[ec]);
        if (!c.is_zero()) cell.push_back({ec, c});
      }
    }
}

void Frame::gp_terms(BladeId a, BladeId b, std::vector<BladeTerm>& out) const {
  if (diagonal_) {
    BladeTerm t = orthogonal_gp(a, b, diag_);
    if (!t.coef.is_zero()) out.push_back(t);
    return;
  }
  const auto& cell = gp_[std::size_t{a} * blade_count() + b];
  out.insert(out.end(), cell.begin(), cell.end());
}

void Frame::terms(ProductKind k, BladeId a, BladeId b, std::vector<BladeTerm>& out) const {
  out.clear();
  if (k == ProductKind::cp || k == ProductKind::acp) {
    std::vector<BladeTerm> ab, ba;
    gp_terms(a, b, ab);
    gp_terms(b, a, ba);
    const Number half = Number::rational(1, 2);
    const Number other = k == ProductKind::cp ? -half : half;
    std::map<BladeId, Number> acc;
    for (const auto& t : ab) acc[t.blade] += half * t.coef;
    for (const auto& t : ba) acc[t.blade] += other * t.coef;
    for (const auto& [bl, c] : acc)
      if (!c.is_zero()) out.push_back({bl, c});
    return;
  }
  gp_terms(a, b, out);
  if (k == ProductKind::gp) return;
  const int ga = grade(a), gb = grade(b);
  std::erase_if(out, [&](const BladeTerm& t) { return !keeps_grade(k, ga, gb, grade(t.blade)); });
}

std::string Frame::blade_name(BladeId b) const {
  if (b == 0) return "1";
  std::string s;
  for (int i = 0; i < dim(); ++i)
    if (b & (BladeId{1} << i)) {
      if (!s.empty()) s += '^';
      s += basis_[i];
    }
  return s;
}

std::optional<int> Frame::basis_index(const std::string& name) const {
  for (int i = 0; i < dim(); ++i)
    if (basis_[i] == name) return i;
  return std::nullopt;
}

BladeId Frame::parse_blade(const std::string& s) const {
  if (s == "1") return 0;
  BladeId b = 0;
  int last = -1;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find('^', start);
    std::string part = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    auto idx = basis_index(part);
    if (!idx) throw Error("UnknownBlade", "'" + part + "' is not a basis vector of frame '" + name_ + "'");
    if (*idx <= last)
      throw Error("NonCanonicalBlade", "blade '" + s + "' must list basis vectors in ascending frame order");
    last = *idx;
    b |= BladeId{1} << *idx;
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return b;
}

std::vector<std::vector<double>> Frame::reciprocal_frame() const {
  const int n = dim();
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = ipm_[i][j].value();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw Error("DegenerateMetric", "frame '" + name_ + "' has a degenerate metric; no reciprocal frame");
  Eigen::MatrixXd inv = lu.solve(Eigen::MatrixXd::Identity(n, n));
  std::vector<std::vector<double>> r(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) r[i][k] = inv(i, k);
  return r;
}

}  // namespace gamacro
