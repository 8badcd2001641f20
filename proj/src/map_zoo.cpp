#include "degreelab/map_zoo.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

#include "degreelab/errors.hpp"
#include "degreelab/random.hpp"

namespace degreelab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(int dim) {
  if (dim != 1 && dim != 2) throw InvalidArgument("only d = 1 and d = 2 are supported");
}

// Homogeneous evaluation of P(a/b) and Q(a/b) scaled by b^n, n = max degree.
std::pair<Complex, Complex> homogeneous_eval(const std::vector<Complex>& num, const std::vector<Complex>& den, Complex a,
                                             Complex b) {
  const std::size_t n = std::max(num.size(), den.size()) - 1;
  std::vector<Complex> a_pow(n + 1, Complex(1.0));
  std::vector<Complex> b_pow(n + 1, Complex(1.0));
  for (std::size_t i = 1; i <= n; ++i) {
    a_pow[i] = a_pow[i - 1] * a;
    b_pow[i] = b_pow[i - 1] * b;
  }
  Complex p(0.0), q(0.0);
  for (std::size_t i = 0; i < num.size(); ++i) p += num[i] * a_pow[i] * b_pow[n - i];
  for (std::size_t i = 0; i < den.size(); ++i) q += den[i] * a_pow[i] * b_pow[n - i];
  return {p, q};
}

void trim(std::vector<Complex>& coeffs) {
  while (!coeffs.empty() && coeffs.back() == Complex(0.0)) coeffs.pop_back();
}

std::string join_complex(const std::vector<Complex>& coeffs) {
  std::string out;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i > 0) out += ',';
    out += format_complex(coeffs[i]);
  }
  return out;
}

// Circle dilation fixing θ = π, stretching a neighbourhood of θ = 0 by λ.
double circle_dilation(double theta, double lambda) {
  return 2.0 * std::atan2(lambda * std::sin(0.5 * theta), std::cos(0.5 * theta));
}

// Schmidt semi-normalized real spherical harmonics, l <= 4; all bounded by 1.
constexpr int kHarmonicDegree = 4;
constexpr int kHarmonicCount = (kHarmonicDegree + 1) * (kHarmonicDegree + 1);
constexpr int kFourierOrder = 8;
constexpr int kFourierCount = 2 * kFourierOrder + 1;

std::array<double, kHarmonicCount> schmidt_harmonics(const SpherePoint& x) {
  std::array<double, kHarmonicCount> out{};
  const double ct = std::clamp(x.z(), -1.0, 1.0);
  const double phi = std::atan2(x.y(), x.x());
  std::size_t idx = 0;
  for (unsigned l = 0; l <= kHarmonicDegree; ++l) {
    out[idx++] = std::assoc_legendre(l, 0, ct);
    for (unsigned m = 1; m <= l; ++m) {
      const double norm = std::sqrt(2.0 * std::tgamma(l - m + 1.0) / std::tgamma(l + m + 1.0));
      const double p = norm * std::assoc_legendre(l, m, ct);
      out[idx++] = p * std::cos(m * phi);
      out[idx++] = p * std::sin(m * phi);
    }
  }
  return out;
}

std::array<double, kFourierCount> fourier_modes(const SpherePoint& x) {
  std::array<double, kFourierCount> out{};
  const double theta = circle_angle(x);
  out[0] = 1.0;
  for (int m = 1; m <= kFourierOrder; ++m) {
    out[2 * m - 1] = std::cos(m * theta);
    out[2 * m] = std::sin(m * theta);
  }
  return out;
}

}  // namespace

SphereMap::SphereMap(int dim, std::string spec, Evaluator evaluator)
    : dim_(dim), spec_(std::move(spec)), evaluator_(std::move(evaluator)) {
  require_dim(dim);
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_complex(Complex value) {
  if (value.imag() == 0.0) return format_real(value.real());
  if (value.real() == 0.0) return format_real(value.imag()) + "i";
  std::string im = format_real(value.imag());
  if (im.front() != '-') im = "+" + im;
  return format_real(value.real()) + im + "i";
}

Complex parse_complex(std::string_view text) {
  auto parse_real = [&](std::string_view part) {
    if (part == "" || part == "+") return 1.0;
    if (part == "-") return -1.0;
    if (part.front() == '+') part.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size()) {
      throw InvalidArgument("invalid complex number '" + std::string(text) + "'");
    }
    return v;
  };
  if (text.empty()) throw InvalidArgument("empty complex number");
  if (text.back() != 'i') return {parse_real(text), 0.0};

  const std::string_view body = text.substr(0, text.size() - 1);
  std::size_t split = std::string_view::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string_view::npos) return {0.0, parse_real(body)};
  return {parse_real(body.substr(0, split)), parse_real(body.substr(split))};
}

std::pair<Complex, Complex> stereographic_pair(const SpherePoint& x) {
  if (x.z() <= 0.0) return {Complex(x.x(), x.y()), Complex(1.0 - x.z())};
  return {Complex(1.0 + x.z()), Complex(x.x(), -x.y())};
}

SpherePoint inverse_stereographic(Complex a, Complex b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0 || !std::isfinite(scale)) return SpherePoint::UnitZ();
  a /= scale;
  b /= scale;
  const Complex ab = a * std::conj(b);
  const double na = std::norm(a);
  const double nb = std::norm(b);
  return SpherePoint(2.0 * ab.real(), 2.0 * ab.imag(), na - nb) / (na + nb);
}

SphereMap identity_map(int dim) {
  require_dim(dim);
  return {dim, "identity:d=" + std::to_string(dim), [](const SpherePoint& x) { return x; }};
}

SphereMap constant_map(int dim) {
  require_dim(dim);
  return {dim, "constant:d=" + std::to_string(dim), [](const SpherePoint&) { return SpherePoint::UnitX(); }};
}

SphereMap antipodal_map(int dim) {
  require_dim(dim);
  return {dim, "antipodal:d=" + std::to_string(dim), [](const SpherePoint& x) { return SpherePoint(-x); }};
}

SphereMap power_map(int k) {
  if (std::abs(k) > 64) throw InvalidArgument("power map requires |k| <= 64");
  return {1, "power:k=" + std::to_string(k), [k](const SpherePoint& x) {
            if (k == 0) return circle_point(0.0);
            return circle_point(k * circle_angle(x));
          }};
}

SphereMap rational_map(std::vector<Complex> numerator, std::vector<Complex> denominator) {
  trim(numerator);
  trim(denominator);
  if (denominator.empty()) throw InvalidArgument("rational map: zero denominator polynomial");
  if (numerator.empty()) numerator.push_back(Complex(0.0));
  std::string spec = "rational:num=" + join_complex(numerator) + ";den=" + join_complex(denominator);
  return {2, std::move(spec), [num = std::move(numerator), den = std::move(denominator)](const SpherePoint& x) {
            const auto [a, b] = stereographic_pair(x);
            const double s = std::hypot(std::abs(a), std::abs(b));
            const auto [p, q] = homogeneous_eval(num, den, a / s, b / s);
            if (std::abs(p) < 1e-14 && std::abs(q) < 1e-14) {
              throw InvalidArgument("rational map: numerator and denominator share a root");
            }
            return inverse_stereographic(p, q);
          }};
}

SphereMap bubble_map(int dim, int k, double lambda) {
  require_dim(dim);
  if (!(lambda >= 1.0 && lambda <= 1e4)) throw InvalidArgument("bubble map requires lambda in [1, 1e4]");
  if (std::abs(k) > 16) throw InvalidArgument("bubble map requires |k| <= 16");
  std::string spec = "bubble:k=" + std::to_string(k) + ",lambda=" + format_real(lambda) + ",d=" + std::to_string(dim);
  if (dim == 1) {
    return {1, std::move(spec), [k, lambda](const SpherePoint& x) {
              return circle_point(k * circle_dilation(circle_angle(x), lambda));
            }};
  }
  return {2, std::move(spec), [k, lambda](const SpherePoint& x) {
            auto [a, b] = stereographic_pair(x);
            const double s = std::hypot(std::abs(a), std::abs(b));
            a *= lambda / s;
            b /= s;
            const int n = std::abs(k);
            Complex p = std::pow(a, n);
            Complex q = std::pow(b, n);
            if (n == 0) p = q = Complex(1.0);
            if (k < 0) {
              p = std::conj(p);
              q = std::conj(q);
            }
            return inverse_stereographic(p, q);
          }};
}

SphereMap multibubble_map(int dim, int sign, std::vector<double> lambdas, std::vector<Complex> centers) {
  require_dim(dim);
  if (sign != 1 && sign != -1) throw InvalidArgument("multibubble sign must be +1 or -1");
  if (centers.empty() || lambdas.size() != centers.size()) {
    throw InvalidArgument("multibubble needs one lambda per center");
  }
  for (double l : lambdas) {
    if (!(l >= 1.0 && l <= 1e4)) throw InvalidArgument("multibubble requires lambdas in [1, 1e4]");
  }
  std::string spec = "multibubble:d=" + std::to_string(dim) + ",sign=" + std::to_string(sign) + ",lambdas=";
  for (std::size_t i = 0; i < lambdas.size(); ++i) spec += (i ? ";" : "") + format_real(lambdas[i]);
  spec += ",centers=";
  for (std::size_t i = 0; i < centers.size(); ++i) {
    spec += (i ? ";" : "") + (dim == 1 ? format_real(centers[i].real()) : format_complex(centers[i]));
  }

  if (dim == 1) {
    return {1, std::move(spec), [sign, lambdas, centers](const SpherePoint& x) {
              const double theta = circle_angle(x);
              double out = 0.0;
              for (std::size_t i = 0; i < lambdas.size(); ++i) {
                out += circle_dilation(std::remainder(theta - centers[i].real(), 2.0 * kPi), lambdas[i]);
              }
              return circle_point(sign * out);
            }};
  }
  return {2, std::move(spec), [sign, lambdas, centers](const SpherePoint& x) {
            auto [a, b] = stereographic_pair(x);
            const double s = std::hypot(std::abs(a), std::abs(b));
            a /= s;
            b /= s;
            Complex p(1.0), q(1.0);
            for (std::size_t i = 0; i < lambdas.size(); ++i) {
              p *= lambdas[i] * (a - centers[i] * b);
              q *= b;
            }
            if (sign < 0) {
              p = std::conj(p);
              q = std::conj(q);
            }
            return inverse_stereographic(p, q);
          }};
}

SphereMap perturb_map(const SphereMap& base, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 0.9)) throw InvalidArgument("perturbation amplitude must lie in [0, 0.9)");
  const int dim = base.dim();
  const int n_basis = dim == 1 ? kFourierCount : kHarmonicCount;
  const int n_comp = dim + 1;

  SeededStream stream(seed, "perturbation");
  Eigen::MatrixXd coeffs(n_comp, n_basis);
  for (int j = 0; j < n_comp; ++j) {
    for (int k = 0; k < n_basis; ++k) coeffs(j, k) = stream.uniform(-1.0, 1.0);
  }
  // Every basis function is bounded by 1, so |field| <= ||row-wise l1 norms||_2.
  const double bound = coeffs.cwiseAbs().rowwise().sum().norm();
  coeffs *= amplitude / bound;

  std::string spec = "perturb:base=" + base.spec() + ",amp=" + format_real(amplitude) + ",seed=" + std::to_string(seed);
  return {dim, std::move(spec), [base, coeffs, dim](const SpherePoint& x) {
            SpherePoint out = base(x);
            if (dim == 1) {
              const auto modes = fourier_modes(x);
              const Eigen::Map<const Eigen::VectorXd> basis(modes.data(), kFourierCount);
              out.head<2>() += coeffs * basis;
            } else {
              const auto modes = schmidt_harmonics(x);
              const Eigen::Map<const Eigen::VectorXd> basis(modes.data(), kHarmonicCount);
              out += coeffs * basis;
            }
            return out;
          }};
}

SphereMap rotated_map(const SphereMap& base, const Eigen::Vector3d& axis, double angle) {
  const int dim = base.dim();
  const Eigen::Vector3d a = dim == 1 ? Eigen::Vector3d::UnitZ() : axis.normalized();
  if (!a.allFinite()) throw InvalidArgument("rotation axis must be nonzero");
  const Eigen::Matrix3d rotation = Eigen::AngleAxisd(angle, a).toRotationMatrix();
  std::string spec = "rotate:base=" + base.spec() + ",axis=" + format_real(axis.x()) + ";" + format_real(axis.y()) + ";" +
                     format_real(axis.z()) + ",angle=" + format_real(angle);
  return {dim, std::move(spec), [base, rotation](const SpherePoint& x) { return SpherePoint(rotation * base(x)); }};
}

SphereMap conjugated_map(const SphereMap& base, const Eigen::Matrix3d& codomain, const Eigen::Matrix3d& domain) {
  return {base.dim(), "conjugate:base=" + base.spec(), [base, codomain, domain](const SpherePoint& x) {
            return SpherePoint(codomain * base(SpherePoint(domain.transpose() * x)));
          }};
}

SampledMap sample_map(const SphereMap& map, std::shared_ptr<const QuadratureGrid> grid) {
  if (map.dim() != grid->dim) throw InvalidArgument("map and grid dimensions differ");
  SampledMap out;
  out.values.resize(3, grid->size());
  for (Eigen::Index i = 0; i < grid->size(); ++i) out.values.col(i) = map(grid->points.col(i));
  out.grid = std::move(grid);
  return out;
}

Eigen::Matrix2d differential(const SphereMap& map, const SpherePoint& x, double h) {
  const int dim = map.dim();
  const auto frame = tangent_frame(x, dim);
  const SpherePoint gx = map(x);
  const auto image_frame = tangent_frame(gx, dim);

  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  for (int k = 0; k < dim; ++k) {
    const SpherePoint forward = std::cos(h) * x + std::sin(h) * frame[k];
    const SpherePoint backward = std::cos(h) * x - std::sin(h) * frame[k];
    const Eigen::Vector3d v = (map(forward) - map(backward)) / (2.0 * h);
    for (int i = 0; i < dim; ++i) d(i, k) = image_frame[i].dot(v);
  }
  return d;
}

double gradient_norm(const SphereMap& map, const SpherePoint& x, double h) {
  if (!(h >= 1e-7 && h <= 1e-2)) throw InvalidArgument("finite-difference step must lie in [1e-7, 1e-2]");
  return differential(map, x, h).norm();
}

double jacobian(const SphereMap& map, const SpherePoint& x, double h) {
  const Eigen::Matrix2d d = differential(map, x, h);
  return map.dim() == 1 ? d(0, 0) : d.determinant();
}

}  // namespace degreelab
