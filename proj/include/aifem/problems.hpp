#pragma once

// Exact solutions and their analytically derived data (f, q, g) for the
// three reference problems, plus the generic problem description consumed
// by the driver.

#include "aifem/fem.hpp"
#include "aifem/geometry.hpp"

namespace aifem {

struct ExactSolution {
  double beta1 = 1.0, beta2 = 1.0;
  ScalarField u1, u2;  // per-region branches
  std::function<Point2(double, double)> grad1, grad2;
  ScalarField f, q, g;

  double value(RegionId r, double x, double y) const {
    return r == RegionId::Region1 ? u1(x, y) : u2(x, y);
  }
  Point2 gradient(RegionId r, double x, double y) const {
    return r == RegionId::Region1 ? grad1(x, y) : grad2(x, y);
  }
};

namespace detail {

inline double sinsin(double x, double y) {
  return std::sin(M_PI * x) * std::sin(M_PI * y);
}
inline Point2 grad_sinsin(double x, double y) {
  return {M_PI * std::cos(M_PI * x) * std::sin(M_PI * y),
          M_PI * std::sin(M_PI * x) * std::cos(M_PI * y)};
}

}  // namespace detail

// u = (1/beta) * phi * sin(pi x) sin(pi y) with phi = x^2 + y^2 - r^2:
// both jumps vanish, f = -laplace(phi * sinsin) on both sides.
inline ExactSolution exact_example1(double beta1, double beta2,
                                    double r = 0.5) {
  ExactSolution ex;
  ex.beta1 = beta1;
  ex.beta2 = beta2;
  auto phi = [r](double x, double y) { return x * x + y * y - r * r; };
  auto make_u = [phi](double beta) {
    return [phi, beta](double x, double y) {
      return phi(x, y) * detail::sinsin(x, y) / beta;
    };
  };
  auto make_grad = [phi](double beta) {
    return [phi, beta](double x, double y) {
      const double s = detail::sinsin(x, y);
      const Point2 gs = detail::grad_sinsin(x, y);
      return Point2{(2 * x * s + phi(x, y) * gs.x) / beta,
                    (2 * y * s + phi(x, y) * gs.y) / beta};
    };
  };
  ex.u1 = make_u(beta1);
  ex.u2 = make_u(beta2);
  ex.grad1 = make_grad(beta1);
  ex.grad2 = make_grad(beta2);
  ex.f = [phi](double x, double y) {
    const double s = detail::sinsin(x, y);
    const Point2 gs = detail::grad_sinsin(x, y);
    return -4.0 * s - 2.0 * (2 * x * gs.x + 2 * y * gs.y) +
           2.0 * M_PI * M_PI * phi(x, y) * s;
  };
  ex.q = [](double, double) { return 0.0; };
  ex.g = [](double, double) { return 0.0; };
  return ex;
}

// u = (1/beta) sin(pi x) sin(pi y) + c*delta with delta = 1 on Region2:
// q = (1/beta1 - 1/beta2) sinsin - c, g = 0, f = 2 pi^2 sinsin.
inline ExactSolution exact_offset_example(double beta1, double beta2,
                                          double c) {
  ExactSolution ex;
  ex.beta1 = beta1;
  ex.beta2 = beta2;
  ex.u1 = [beta1](double x, double y) { return detail::sinsin(x, y) / beta1; };
  ex.u2 = [beta2, c](double x, double y) {
    return detail::sinsin(x, y) / beta2 + c;
  };
  ex.grad1 = [beta1](double x, double y) {
    return (1.0 / beta1) * detail::grad_sinsin(x, y);
  };
  ex.grad2 = [beta2](double x, double y) {
    return (1.0 / beta2) * detail::grad_sinsin(x, y);
  };
  ex.f = [](double x, double y) {
    return 2.0 * M_PI * M_PI * detail::sinsin(x, y);
  };
  ex.q = [beta1, beta2, c](double x, double y) {
    return (1.0 / beta1 - 1.0 / beta2) * detail::sinsin(x, y) - c;
  };
  ex.g = [](double, double) { return 0.0; };
  return ex;
}

// One reference problem: level set, coefficients, and derived data.
struct ProblemSpec {
  std::string name;
  LevelSet levelset;
  double beta1 = 1.0, beta2 = 1.0;
  bool has_exact = false;
  ExactSolution exact;

  ProblemData data(GMode g_mode = GMode::Nodal) const {
    ProblemData d;
    d.beta1 = beta1;
    d.beta2 = beta2;
    d.g_mode = g_mode;
    if (has_exact) {
      d.f = exact.f;
      d.q = exact.q;
      d.g = exact.g;
    }
    return d;
  }
};

// Examples 1-3: circle / cardioid / five-star + circle.
inline ProblemSpec make_example(int id, double beta1, double beta2,
                                double radius = 0.5) {
  ProblemSpec p;
  p.beta1 = beta1;
  p.beta2 = beta2;
  p.has_exact = true;
  switch (id) {
    case 1:
      p.name = "example1";
      p.levelset = make_circle(radius);
      p.exact = exact_example1(beta1, beta2, radius);
      break;
    case 2:
      p.name = "example2";
      p.levelset = make_cardioid();
      p.exact = exact_offset_example(beta1, beta2, 5.0);
      break;
    case 3:
      p.name = "example3";
      p.levelset = make_fivestar_circle();
      p.exact = exact_offset_example(beta1, beta2, 1.0);
      break;
    default:
      throw LookupError("make_example: unknown example id " +
                        std::to_string(id));
  }
  return p;
}

}  // namespace aifem
