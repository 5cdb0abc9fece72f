#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cbtomo {

class UnderdeterminedError : public std::runtime_error {
 public:
  UnderdeterminedError(int equations, int parameters, int rank)
      : std::runtime_error("underdetermined system: " + std::to_string(equations) +
                           " equations, " + std::to_string(parameters) + " parameters, rank " +
                           std::to_string(rank)),
        equations(equations),
        parameters(parameters),
        rank(rank) {}
  int equations;
  int parameters;
  int rank;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Eigen::MatrixXcd best, int iterations)
      : std::runtime_error(what), best(std::move(best)), iterations(iterations) {}
  Eigen::MatrixXcd best;
  int iterations;
};

class LevelCrossingError : public std::runtime_error {
 public:
  LevelCrossingError(int level, int partner)
      : std::runtime_error("level ordering changes between configurations: level " +
                           std::to_string(level) + " follows level " + std::to_string(partner)),
        level(level),
        partner(partner) {}
  int level;
  int partner;
};

class NyquistError : public std::runtime_error {
 public:
  NyquistError(double omega, double nyquist)
      : std::runtime_error("time step too coarse: angular frequency " + std::to_string(omega) +
                           " exceeds Nyquist limit " + std::to_string(nyquist)),
        omega(omega) {}
  double omega;
};

class ConditioningError : public std::runtime_error {
 public:
  explicit ConditioningError(double condition)
      : std::runtime_error("harmonic design matrix ill-conditioned (condition number " +
                           std::to_string(condition) + ")"),
        condition(condition) {}
  double condition;
};

class DegenerateDoubletError : public std::runtime_error {
 public:
  explicit DegenerateDoubletError(double gap)
      : std::runtime_error("qubit doublet is degenerate (gap " + std::to_string(gap) + " GHz)"),
        gap(gap) {}
  double gap;
};

}  // namespace cbtomo
