#include "lsaga/asymptotics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lsaga {
namespace {

void require_symmetric(const Matrix& H, const char* what) {
  if (H.rows() != H.cols() || H.rows() == 0) {
    throw std::invalid_argument(std::string(what) + " must be a non-empty square matrix");
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    std::ostringstream os;
    os << what << " is not symmetric (max |H - H^T| = " << asym << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

double min_eigenvalue(const Matrix& H) {
  require_symmetric(H, "matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(H, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Matrix gamma_matrix(const FiniteSumProblem& problem, const Vector& x_star,
                    double gradient_tol) {
  const double norm = problem.full_gradient(x_star).norm();
  if (norm > gradient_tol) {
    std::ostringstream os;
    os << "x* is not an equilibrium: ||grad f(x*)|| = " << norm << " > " << gradient_tol;
    throw std::invalid_argument(os.str());
  }
  const auto d = static_cast<Eigen::Index>(problem.dim());
  Matrix gamma = Matrix::Zero(d, d);
  Vector g(d);
  for (std::size_t k = 0; k < problem.size(); ++k) {
    problem.component_gradient(k, view(x_star), view(g));
    gamma.selfadjointView<Eigen::Lower>().rankUpdate(g);
  }
  gamma = gamma.selfadjointView<Eigen::Lower>();
  return gamma / static_cast<double>(problem.size());
}

AsymptoticCovariance solve_lyapunov(const Matrix& H, const Matrix& Gamma, double lambda) {
  require_symmetric(H, "H");
  require_symmetric(Gamma, "Gamma");
  if (Gamma.rows() != H.rows()) throw std::invalid_argument("H and Gamma sizes differ");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(H);
  const Vector& eig = solver.eigenvalues();
  const Matrix& Q = solver.eigenvectors();
  const double rho = eig.minCoeff();
  if (!(rho > 0.5)) {
    std::ostringstream os;
    os << "minimum Hessian eigenvalue rho = " << rho
       << " must exceed 1/2 for the limiting covariance to exist";
    throw std::invalid_argument(os.str());
  }

  const double factor = (1.0 - lambda) * (1.0 - lambda);
  const Matrix rotated = Q.transpose() * Gamma * Q;
  Matrix inner(H.rows(), H.cols());
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = 0; j < H.cols(); ++j)
      inner(i, j) = rotated(i, j) / (eig(i) + eig(j) - 1.0);
  Matrix sigma = Q * inner * Q.transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  return {H, Gamma, lambda, factor * sigma, rho};
}

double lyapunov_residual(const AsymptoticCovariance& cov) {
  const auto d = cov.H.rows();
  const Matrix shifted = cov.H - 0.5 * Matrix::Identity(d, d);
  const double factor = (1.0 - cov.lambda) * (1.0 - cov.lambda);
  const Matrix r = shifted.transpose() * cov.Sigma + cov.Sigma * shifted - factor * cov.Gamma;
  return r.norm() / std::max(1.0, cov.Gamma.norm());
}

Matrix expm(const Matrix& A) {
  const auto d = A.rows();
  const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix B = A / std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(d, d);
  Matrix term = Matrix::Identity(d, d);
  for (int k = 1; k <= 30; ++k) {
    term = (term * B) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) result = (result * result).eval();
  return result;
}

double required_horizon(double rho) {
  if (!(rho > 0.5)) throw std::invalid_argument("rho must exceed 1/2");
  return -std::log(1e-12) / (2.0 * rho - 1.0);
}

Matrix quadrature_covariance(const Matrix& H, const Matrix& Gamma, double lambda,
                             double horizon, std::size_t steps) {
  require_symmetric(H, "H");
  require_symmetric(Gamma, "Gamma");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  const double rho = min_eigenvalue(H);
  if (!(rho > 0.5)) {
    throw std::invalid_argument("minimum Hessian eigenvalue must exceed 1/2");
  }
  const double needed = required_horizon(rho);
  if (horizon < needed) {
    std::ostringstream os;
    os << "horizon " << horizon << " leaves a tail above 1e-12; need at least " << needed;
    throw std::invalid_argument(os.str());
  }
  if (steps < 2) steps = 2;
  if (steps % 2 != 0) ++steps;

  const auto d = H.rows();
  const double factor = (1.0 - lambda) * (1.0 - lambda);
  if (factor == 0.0) return Matrix::Zero(d, d);

  const double h = horizon / static_cast<double>(steps);
  const Matrix shifted = H - 0.5 * Matrix::Identity(d, d);
  const Matrix step = expm(-shifted * h);
  const Matrix step_t = step.transpose();

  // Integrand F(u) = E(u)^T Gamma E(u) with E(u + h) = E(u) E(h).
  Matrix integrand = Gamma;
  Matrix sum = integrand;
  for (std::size_t j = 1; j <= steps; ++j) {
    integrand = step_t * integrand * step;
    const double weight = j == steps ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    sum += weight * integrand;
  }
  Matrix sigma = factor * (h / 3.0) * sum;
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace lsaga
