#include "fluctrel/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "fluctrel/oracles.hpp"

namespace fluctrel {

double param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

ProcessSpec make_langevin(int dim, const Mat& gamma, const Mat& pi,
                          LangevinData data, double horizon) {
  ProcessSpec spec;
  spec.dim = dim;
  spec.horizon = horizon;
  spec.beta = data.beta;
  spec.additive_noise = true;

  data.gamma = gamma;
  data.pi = pi;
  LangevinData ld = data;
  spec.langevin = ld;

  Mat gmat = gamma, pmat = pi;
  auto gradH = ld.gradH;
  auto G = ld.G;
  spec.drift_plus = [gmat, gradH, dim](double t, const Vec& x, Vec& out) {
    Vec g(dim);
    gradH(t, x, g);
    out.noalias() = -gmat * g;
  };
  spec.drift_minus = [pmat, gradH, G, dim](double t, const Vec& x, Vec& out) {
    Vec g(dim);
    gradH(t, x, g);
    out.noalias() = pmat * g;
    if (G) {
      Vec f(dim);
      G(t, x, f);
      out += f;
    }
  };
  double beta = ld.beta;
  spec.covariance = [gmat, beta](double, const Vec&, const Vec&, Mat& out) {
    out = (2.0 / beta) * gmat;
  };
  return spec;
}

namespace {

// Gaussian phi family for quadratic Hamiltonians H_t = (1/2) x . A_t x:
// phi_t = beta (H_t - F_t), normalized.
PhiFamily gaussian_phi_family(std::function<Mat(double)> stiffness, double beta) {
  PhiFamily f;
  auto logZ = [stiffness, beta](double t) {
    Mat A = stiffness(t);
    int d = static_cast<int>(A.rows());
    return 0.5 * d * std::log(2.0 * M_PI / beta) -
           0.5 * std::log(A.determinant());
  };
  f.value = [stiffness, beta, logZ](double t, const Vec& x) {
    Mat A = stiffness(t);
    return 0.5 * beta * x.dot(A * x) + logZ(t);
  };
  f.grad = [stiffness, beta](double t, const Vec& x, Vec& out) {
    out.noalias() = beta * (stiffness(t) * x);
  };
  f.dt = [stiffness, beta, logZ](double t, const Vec& x) {
    double ht = 1e-6 * (1.0 + std::abs(t));
    Mat dA = (stiffness(t + ht) - stiffness(t - ht)) / (2.0 * ht);
    double dlogZ = (logZ(t + ht) - logZ(t - ht)) / (2.0 * ht);
    return 0.5 * beta * x.dot(dA * x) + dlogZ;
  };
  f.sample = [stiffness, beta](double t, RngStream& rng) {
    Mat A = stiffness(t);
    Mat cov = A.inverse() / beta;
    Mat L = psd_factor(cov);
    Vec xi(A.rows());
    rng.fill_normal(xi);
    return Vec(L * xi);
  };
  return f;
}

// Tabulated inverse-CDF sampler for a 1-d unnormalized log-density.
struct Tabulated1D {
  std::vector<double> grid, cdf;
  double draw(double u) const {
    double target = u * cdf.back();
    auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    std::size_t i = std::min<std::size_t>(
        std::max<std::ptrdiff_t>(1, it - cdf.begin()), cdf.size() - 1);
    double c0 = cdf[i - 1], c1 = cdf[i];
    double w = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
    return grid[i - 1] + w * (grid[i] - grid[i - 1]);
  }
};

Tabulated1D tabulate_density(const std::function<double(double)>& logrho,
                             double lo, double hi, int n = 4001) {
  Tabulated1D t;
  t.grid.resize(n);
  t.cdf.resize(n);
  std::vector<double> vals(n);
  double vmax = -1e300;
  for (int i = 0; i < n; ++i) {
    t.grid[i] = lo + (hi - lo) * i / (n - 1.0);
    vals[i] = logrho(t.grid[i]);
    vmax = std::max(vmax, vals[i]);
  }
  double c = 0.0;
  t.cdf[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    double h = t.grid[i] - t.grid[i - 1];
    c += 0.5 * h * (std::exp(vals[i - 1] - vmax) + std::exp(vals[i] - vmax));
    t.cdf[i] = c;
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// ou / breathing_ou

ProcessSpec make_breathing_ou(const Params& p) {
  double k0 = param(p, "k0", 1.0);
  double k1 = param(p, "k1", 2.0);
  double beta = param(p, "beta", 1.0);
  double T = param(p, "T", 2.0);

  auto k_of = [k0, k1, T](double t) {
    double s = std::clamp(t / T, 0.0, 1.0);
    return k0 + (k1 - k0) * s;
  };
  double kdot = (k1 - k0) / T;

  LangevinData ld;
  ld.beta = beta;
  ld.H = [k_of](double t, const Vec& x) { return 0.5 * k_of(t) * x[0] * x[0]; };
  ld.gradH = [k_of](double t, const Vec& x, Vec& out) { out[0] = k_of(t) * x[0]; };
  ld.dtH = (k0 == k1) ? ScalarFieldFn{}
                      : ScalarFieldFn([kdot](double, const Vec& x) {
                          return 0.5 * kdot * x[0] * x[0];
                        });
  ld.free_energy = [k_of, beta](double t) {
    return -std::log(std::sqrt(2.0 * M_PI / (beta * k_of(t)))) / beta;
  };

  ProcessSpec spec = make_langevin(1, Mat::Identity(1, 1), Mat::Zero(1, 1), ld, T);
  spec.family_tag = (k0 == k1) ? "ou" : "breathing_ou";
  spec.div_plus = [k_of](double t, const Vec&) { return -k_of(t); };
  spec.div_minus = [](double, const Vec&) { return 0.0; };
  spec.drift_jacobian = [k_of](double t, const Vec&, Mat& out) {
    out(0, 0) = -k_of(t);
  };
  auto stiffness = [k_of](double t) {
    Mat a(1, 1);
    a(0, 0) = k_of(t);
    return a;
  };
  spec.phi = gaussian_phi_family(stiffness, beta);

  // Density family evolved from the initial Gibbs state: Gaussian with
  // variance solving v' = -2 k_t v + 2/beta.
  int nsteps = 8192;
  std::vector<double> vtab(nsteps + 1);
  vtab[0] = 1.0 / (beta * k0);
  double dt = T / nsteps;
  for (int i = 0; i < nsteps; ++i) {
    double t = i * dt;
    auto rhs = [&](double tt, double v) { return -2.0 * k_of(tt) * v + 2.0 / beta; };
    double v = vtab[i];
    double r1 = rhs(t, v);
    double r2 = rhs(t + 0.5 * dt, v + 0.5 * dt * r1);
    double r3 = rhs(t + 0.5 * dt, v + 0.5 * dt * r2);
    double r4 = rhs(t + dt, v + dt * r3);
    vtab[i + 1] = v + dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
  }
  auto v_of = [vtab, nsteps, T](double t) {
    double s = std::clamp(t / T, 0.0, 1.0) * nsteps;
    int i = std::min(nsteps - 1, static_cast<int>(s));
    double w = s - i;
    return (1.0 - w) * vtab[i] + w * vtab[i + 1];
  };
  PhiFamily ev;
  ev.value = [v_of](double t, const Vec& x) {
    double v = v_of(t);
    return 0.5 * x[0] * x[0] / v + 0.5 * std::log(2.0 * M_PI * v);
  };
  ev.grad = [v_of](double t, const Vec& x, Vec& out) { out[0] = x[0] / v_of(t); };
  ev.dt = [v_of, k_of, beta](double t, const Vec& x) {
    double v = v_of(t);
    double vdot = -2.0 * k_of(t) * v + 2.0 / beta;
    return vdot * (0.5 / v - 0.5 * x[0] * x[0] / (v * v));
  };
  ev.sample = [v_of](double t, RngStream& rng) {
    Vec x(1);
    x[0] = std::sqrt(v_of(t)) * rng.normal();
    return x;
  };
  spec.phi_evolving = ev;
  return spec;
}

ProcessSpec make_ou(const Params& p) {
  Params q = p;
  double k = param(p, "k", 1.0);
  q["k0"] = k;
  q["k1"] = k;
  if (!q.count("T")) q["T"] = 1.0;
  ProcessSpec spec = make_breathing_ou(q);
  spec.family_tag = "ou";
  return spec;
}

// ---------------------------------------------------------------------------
// double_well: H = a x^4/4 - b x^2/2

ProcessSpec make_double_well(const Params& p) {
  double a = param(p, "a", 1.0);
  double b = param(p, "b", 1.0);
  double beta = param(p, "beta", 1.0);
  double T = param(p, "T", 1.0);

  LangevinData ld;
  ld.beta = beta;
  ld.H = [a, b](double, const Vec& x) {
    double x2 = x[0] * x[0];
    return 0.25 * a * x2 * x2 - 0.5 * b * x2;
  };
  ld.gradH = [a, b](double, const Vec& x, Vec& out) {
    out[0] = a * x[0] * x[0] * x[0] - b * x[0];
  };

  ProcessSpec spec = make_langevin(1, Mat::Identity(1, 1), Mat::Zero(1, 1), ld, T);
  spec.family_tag = "double_well";
  spec.div_plus = [a, b](double, const Vec& x) { return -(3.0 * a * x[0] * x[0] - b); };
  spec.div_minus = [](double, const Vec&) { return 0.0; };
  spec.drift_jacobian = [a, b](double, const Vec& x, Mat& out) {
    out(0, 0) = -(3.0 * a * x[0] * x[0] - b);
  };

  double L = 2.0 + 3.0 * std::pow(b / a, 0.5) + 3.0 * std::pow(beta * a, -0.25);
  auto H = ld.H;
  auto logrho = [H, beta](double x) {
    Vec v(1);
    v[0] = x;
    return -beta * H(0.0, v);
  };
  auto table = std::make_shared<Tabulated1D>(tabulate_density(logrho, -L, L));
  // log Z by the same trapezoid table (max-shifted): recompute directly.
  double vmax = -1e300;
  for (double x : table->grid) vmax = std::max(vmax, logrho(x));
  double logZ = vmax + std::log(table->cdf.back());

  PhiFamily f;
  f.value = [H, beta, logZ](double t, const Vec& x) { return beta * H(t, x) + logZ; };
  f.grad = [a, b, beta](double, const Vec& x, Vec& out) {
    out[0] = beta * (a * x[0] * x[0] * x[0] - b * x[0]);
  };
  f.dt = [](double, const Vec&) { return 0.0; };
  f.sample = [table](double, RngStream& rng) {
    Vec x(1);
    x[0] = table->draw(rng.uniform());
    return x;
  };
  spec.phi = f;
  spec.phi_evolving = f;  // stationary start: current and complete coincide
  return spec;
}

// ---------------------------------------------------------------------------
// langevin_kramers: x = (q, p), H = p^2/(2m) + (1/2) k_t q^2, G = (0, f_t)

ProcessSpec make_langevin_kramers(const Params& p) {
  double mass = param(p, "m", 1.0);
  double gam = param(p, "gamma", 1.0);
  double k0 = param(p, "k0", 1.0);
  double k1 = param(p, "k1", 1.0);
  double f0 = param(p, "f", 0.0);
  double beta = param(p, "beta", 1.0);
  double T = param(p, "T", 1.0);

  auto k_of = [k0, k1, T](double t) {
    double s = std::clamp(t / T, 0.0, 1.0);
    return k0 + (k1 - k0) * s;
  };
  double kdot = (k1 - k0) / T;

  Mat G = Mat::Zero(2, 2);
  G(1, 1) = gam;
  Mat Pi(2, 2);
  Pi << 0, 1, -1, 0;

  LangevinData ld;
  ld.beta = beta;
  ld.H = [k_of, mass](double t, const Vec& x) {
    return 0.5 * x[1] * x[1] / mass + 0.5 * k_of(t) * x[0] * x[0];
  };
  ld.gradH = [k_of, mass](double t, const Vec& x, Vec& out) {
    out[0] = k_of(t) * x[0];
    out[1] = x[1] / mass;
  };
  ld.dtH = (k0 == k1) ? ScalarFieldFn{}
                      : ScalarFieldFn([kdot](double, const Vec& x) {
                          return 0.5 * kdot * x[0] * x[0];
                        });
  if (f0 != 0.0) {
    ld.G = [f0](double, const Vec&, Vec& out) {
      out[0] = 0.0;
      out[1] = f0;
    };
    ld.divG = [](double, const Vec&) { return 0.0; };
  }
  ld.free_energy = [k_of, mass, beta](double t) {
    double Zq = std::sqrt(2.0 * M_PI / (beta * k_of(t)));
    double Zp = std::sqrt(2.0 * M_PI * mass / beta);
    return -std::log(Zq * Zp) / beta;
  };

  ProcessSpec spec = make_langevin(2, G, Pi, ld, T);
  spec.family_tag = "langevin_kramers";
  spec.involution = Involution::momentum_flip(1);
  spec.div_plus = [gam, mass](double, const Vec&) { return -gam / mass; };
  spec.div_minus = [](double, const Vec&) { return 0.0; };
  spec.drift_jacobian = [k_of, gam, mass](double t, const Vec&, Mat& out) {
    out.resize(2, 2);
    out << 0.0, 1.0 / mass, -k_of(t), -gam / mass;
  };
  auto stiffness = [k_of, mass](double t) {
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = k_of(t);
    A(1, 1) = 1.0 / mass;
    return A;
  };
  spec.phi = gaussian_phi_family(stiffness, beta);
  if (k0 == k1 && f0 == 0.0) spec.phi_evolving = spec.phi;
  return spec;
}

// ---------------------------------------------------------------------------
// linear: dx = M x + noise, M = -(Gamma - Pi) C^-1 (2-d catalog model)

ProcessSpec make_linear2d(const Params& p) {
  double alpha = param(p, "alpha", 1.0);
  double beta = param(p, "beta", 1.0);
  double gscale = param(p, "gamma", 1.0);
  double T = param(p, "T", 1.0);

  Mat gamma = gscale * Mat::Identity(2, 2);
  Mat Pi(2, 2);
  Pi << 0, alpha, -alpha, 0;
  Mat C = Mat::Identity(2, 2);
  LinearModel model = LinearModel::from_gpc(gamma, Pi, C, beta);
  Mat M = model.M;

  LangevinData ld;
  ld.beta = beta;
  Mat Cinv = C.inverse();
  ld.H = [Cinv](double, const Vec& x) { return 0.5 * x.dot(Cinv * x); };
  ld.gradH = [Cinv](double, const Vec& x, Vec& out) { out.noalias() = Cinv * x; };
  ld.free_energy = [C, beta](double) {
    return -0.5 * std::log(std::pow(2.0 * M_PI / beta, 2) * C.determinant()) / beta;
  };

  ProcessSpec spec = make_langevin(2, gamma, Pi, ld, T);
  spec.family_tag = "linear";
  spec.div_plus = [gamma, Cinv](double, const Vec&) { return -(gamma * Cinv).trace(); };
  spec.div_minus = [](double, const Vec&) { return 0.0; };
  spec.drift_jacobian = [M](double, const Vec&, Mat& out) { out = M; };
  auto stiffness = [Cinv](double) { return Cinv; };
  spec.phi = gaussian_phi_family(stiffness, beta);
  spec.phi_evolving = spec.phi;
  return spec;
}

// ---------------------------------------------------------------------------
// kraichnan_tangent: matrix process dX = S dt X

ProcessSpec make_kraichnan_tangent(const Params& p) {
  int d = static_cast<int>(param(p, "d", 1.0));
  double amplitude = param(p, "amplitude", 1.0);
  double compress = param(p, "compressibility", 1.0);
  double T = param(p, "T", 1.0);

  ProcessSpec spec;
  spec.dim = d * d;
  spec.horizon = T;
  spec.family_tag = "kraichnan_tangent";
  KraichnanTensor K = KraichnanTensor::isotropic(d, amplitude, compress);
  spec.kraichnan = K;
  Mat B = K.strat_drift();
  spec.drift_plus = [B, d](double, const Vec& x, Vec& out) {
    Eigen::Map<const Mat> X(x.data(), d, d);
    Mat r = B * X;
    out = Eigen::Map<const Vec>(r.data(), d * d);
  };
  spec.div_plus = [B, d](double, const Vec&) { return d * B.trace(); };
  spec.div_minus = [](double, const Vec&) { return 0.0; };
  KraichnanTensor Kc = K;
  spec.covariance = [Kc, d](double, const Vec& x, const Vec& y, Mat& out) {
    Eigen::Map<const Mat> X(x.data(), d, d);
    Eigen::Map<const Mat> Y(y.data(), d, d);
    Kc.covariance(X, Y, out);
  };

  if (d == 1) {
    // Log-normal density family evolved from ln X ~ N(0, s0^2).
    double c = K.lambda_trace();  // scalar noise variance
    double s0 = param(p, "s0", 0.25);
    auto mt = [c](double t) { return -0.5 * c * t; };
    auto vt = [c, s0](double t) { return s0 * s0 + c * t; };
    PhiFamily f;
    f.value = [mt, vt](double t, const Vec& x) {
      double l = std::log(x[0]);
      double v = vt(t);
      double z = l - mt(t);
      return l + 0.5 * std::log(2.0 * M_PI * v) + 0.5 * z * z / v;
    };
    f.grad = [mt, vt](double t, const Vec& x, Vec& out) {
      double l = std::log(x[0]);
      out[0] = (1.0 + (l - mt(t)) / vt(t)) / x[0];
    };
    f.dt = [mt, vt, c](double t, const Vec& x) {
      double v = vt(t);
      double z = std::log(x[0]) - mt(t);
      return 0.5 * c / v + 0.5 * c * z / v - 0.5 * c * z * z / (v * v);
    };
    f.sample = [mt, vt](double t, RngStream& rng) {
      Vec x(1);
      x[0] = std::exp(mt(t) + std::sqrt(vt(t)) * rng.normal());
      return x;
    };
    spec.phi = f;
    spec.phi_evolving = f;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// kraichnan_flow: 1-d Lagrangian tracer in a homogeneous smooth ensemble,
// D(x, y) = g exp(-(x-y)^2 / (2 l^2)).

ProcessSpec make_kraichnan_flow(const Params& p) {
  double g = param(p, "g", 1.0);
  double l = param(p, "l", 1.0);
  double T = param(p, "T", 1.0);
  ProcessSpec spec;
  spec.dim = 1;
  spec.horizon = T;
  spec.family_tag = "kraichnan_flow";
  spec.covariance = [g, l](double, const Vec& x, const Vec& y, Mat& out) {
    double r = (x[0] - y[0]) / l;
    out(0, 0) = g * std::exp(-0.5 * r * r);
  };
  // Homogeneous, even covariance: both corrections vanish identically.
  spec.ito_correction_fn = [](double, const Vec&, Vec& out) { out.setZero(); };
  spec.hat_shift_fn = [](double, const Vec&, Vec& out) { out.setZero(); };
  spec.div_plus = [](double, const Vec&) { return 0.0; };
  spec.div_minus = [](double, const Vec&) { return 0.0; };
  return spec;
}

// ---------------------------------------------------------------------------
// flux1d: dx = -H'(x) dt + noise with odd cubic H; resuscitating realization

ProcessSpec make_flux1d(const Params& p) {
  double a3 = param(p, "a3", 1.0 / 3.0);
  double a2 = param(p, "a2", 0.0);
  double beta = param(p, "beta", 1.0);
  double T = param(p, "T", 1.0);

  LangevinData ld;
  ld.beta = beta;
  ld.H = [a3, a2](double, const Vec& x) {
    return a3 * x[0] * x[0] * x[0] + a2 * x[0] * x[0];
  };
  ld.gradH = [a3, a2](double, const Vec& x, Vec& out) {
    out[0] = 3.0 * a3 * x[0] * x[0] + 2.0 * a2 * x[0];
  };

  ProcessSpec spec = make_langevin(1, Mat::Identity(1, 1), Mat::Zero(1, 1), ld, T);
  spec.family_tag = "flux1d";
  spec.div_plus = [a3, a2](double, const Vec& x) { return -(6.0 * a3 * x[0] + 2.0 * a2); };
  spec.div_minus = [](double, const Vec&) { return 0.0; };
  spec.drift_jacobian = [a3, a2](double, const Vec& x, Mat& out) {
    out(0, 0) = -(6.0 * a3 * x[0] + 2.0 * a2);
  };

  // Resuscitating boundary: escape in finite time, re-entry from the other
  // side.  X_max = 50 (beta c)^{1/3} with c = 2/beta the noise variance.
  double c = 2.0 / beta;
  double xmax = 50.0 * std::cbrt(beta * c);
  int dir = a3 > 0 ? -1 : +1;  // escape direction
  spec.reinject = [xmax, dir](Vec& x) {
    if (dir < 0 && x[0] < -xmax) {
      x[0] = xmax;
      return true;
    }
    if (dir > 0 && x[0] > xmax) {
      x[0] = -xmax;
      return true;
    }
    return false;
  };
  spec.blowup_guard = 1e12;  // re-injection handles the escape
  return spec;
}

// ---------------------------------------------------------------------------

ProcessSpec make_process(const std::string& name, const Params& overrides) {
  for (const auto& e : process_catalog()) {
    if (e.name == name) {
      Params p = e.defaults;
      for (const auto& [k, v] : overrides) p[k] = v;
      return e.make(p);
    }
  }
  throw ConfigInvalid("unknown process: " + name);
}

bool catalog_has(const std::string& name) {
  for (const auto& e : process_catalog())
    if (e.name == name) return true;
  return false;
}

const std::vector<CatalogEntry>& process_catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"ou",
       "1-d Ornstein-Uhlenbeck, H = k x^2 / 2",
       {{"k", 1.0}, {"beta", 1.0}, {"T", 1.0}},
       {"natural", "hat_plus_zero", "canonical", "reversed_protocol",
        "current_reversal", "complete_reversal"},
       &make_ou},
      {"breathing_ou",
       "1-d Langevin with stiffness ramp k0 -> k1",
       {{"k0", 1.0}, {"k1", 2.0}, {"beta", 1.0}, {"T", 2.0}},
       {"natural", "hat_plus_zero", "canonical", "reversed_protocol",
        "current_reversal", "complete_reversal"},
       &make_breathing_ou},
      {"double_well",
       "1-d Langevin, H = a x^4/4 - b x^2/2",
       {{"a", 1.0}, {"b", 1.0}, {"beta", 1.0}, {"T", 1.0}},
       {"natural", "hat_plus_zero", "canonical", "reversed_protocol",
        "current_reversal", "complete_reversal"},
       &make_double_well},
      {"langevin_kramers",
       "underdamped (q, p), V_t = k_t q^2 / 2, force f on p",
       {{"m", 1.0}, {"gamma", 1.0}, {"k0", 1.0}, {"k1", 1.0}, {"f", 0.0},
        {"beta", 1.0}, {"T", 1.0}},
       {"natural", "canonical"},
       &make_langevin_kramers},
      {"linear",
       "2-d linear Langevin, Gamma = g I, Pi = alpha J, C = I",
       {{"alpha", 1.0}, {"gamma", 1.0}, {"beta", 1.0}, {"T", 1.0}},
       {"natural", "hat_plus_zero", "canonical", "reversed_protocol",
        "current_reversal", "complete_reversal"},
       &make_linear2d},
      {"kraichnan_tangent",
       "homogeneous-Kraichnan tangent cocycle dX = S dt X",
       {{"d", 1.0}, {"amplitude", 1.0}, {"compressibility", 1.0}, {"T", 1.0},
        {"s0", 0.25}},
       {"natural", "reversed_protocol", "complete_reversal"},
       &make_kraichnan_tangent},
      {"kraichnan_flow",
       "1-d tracer in a smooth homogeneous velocity ensemble",
       {{"g", 1.0}, {"l", 1.0}, {"T", 1.0}},
       {"natural", "hat_plus_zero", "reversed_protocol"},
       &make_kraichnan_flow},
      {"flux1d",
       "1-d Langevin with odd cubic H and constant-flux steady state",
       {{"a3", 1.0 / 3.0}, {"a2", 0.0}, {"beta", 1.0}, {"T", 1.0}},
       {"natural", "hat_plus_zero"},
       &make_flux1d},
  };
  return entries;
}

}  // namespace fluctrel
