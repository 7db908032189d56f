#pragma once

#include <fragrd/core.hpp>

#include <json.hpp>

#include <utility>
#include <vector>

namespace fragrd {

/// Bistable nonlinearity f on [0,1]: f(0) = f(1) = 0, f < 0 on (0,theta),
/// f > 0 on (theta,1). Stored as a piecewise cubic so the cubic and the
/// tabulated (natural spline) kinds share evaluation, derivatives and extrema.
class BistableReaction {
public:
    enum class Kind { Cubic, Table };

    static BistableReaction cubic(double theta);
    /// Natural cubic spline through (s_i, f_i); s must run strictly increasing
    /// from 0 to 1 and the sign pattern must be bistable.
    static BistableReaction table(std::vector<std::pair<double, double>> points);

    static BistableReaction from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    /// f(u); throws SolverAbort when u lies outside [0,1].
    double operator()(double u) const;
    double eval(double u) const { return (*this)(u); }
    double derivative(double u) const;
    /// Integral of f over [0,u].
    double primitive(double u) const;

    /// Piecewise polynomial evaluated without the range check; end pieces are
    /// extended beyond [0,1].
    double value_extended(double u) const;

    Kind kind() const { return kind_; }
    double theta() const { return theta_; }
    double m_prime() const { return m_prime_; }
    double m() const { return m_; }
    double mass() const { return mass_; }

private:
    struct Piece {
        double x0 = 0.0;
        double x1 = 1.0;
        // f(s) = c[0] + c[1] t + c[2] t^2 + c[3] t^3, t = s - x0
        std::array<double, 4> c{};
    };

    BistableReaction() = default;
    void finalize();
    const Piece& piece_for(double u) const;

    Kind kind_ = Kind::Cubic;
    double theta_ = 0.0;
    double m_prime_ = 0.0;
    double m_ = 0.0;
    double mass_ = 0.0;
    std::vector<Piece> pieces_;
    std::vector<std::pair<double, double>> points_;
};

/// Measure below which every initial indicator goes extinct:
/// e^{-M'} (4 pi)^{N/2} theta / 2.
double small_mass_epsilon(const BistableReaction& f, int dim);

/// Speed of the travelling front phi(x - ct) joining 1 to 0. Closed form
/// (1 - 2 theta)/sqrt 2 for the cubic, shooting for tabulated f.
double exact_front_speed(const BistableReaction& f);

/// Bisection on c for the heteroclinic orbit of phi'' + c phi' + f(phi) = 0.
double shooting_front_speed(const BistableReaction& f, double tol = 1e-9);

} // namespace fragrd
