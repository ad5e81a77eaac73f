#include "ptw/model.hpp"
#include "ptw/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace ptw {

const char* to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::NotApplicable: return "not_applicable";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::DegenerateOrbit: return "degenerate_orbit";
    case ErrorKind::Nondegeneracy: return "nondegeneracy";
    case ErrorKind::ConstraintCount: return "constraint_count";
    case ErrorKind::Contour: return "contour";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::BranchAmbiguity: return "branch_ambiguity";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

namespace {

void check_domain(const ModelSpec& m, const VecXd& u)
{
    if (u.size() != m.n)
        fail(ErrorKind::Domain, "state has size " + std::to_string(u.size()) + ", model " + m.id + " expects " + std::to_string(m.n));
    if (!u.allFinite())
        fail(ErrorKind::Domain, "non-finite state passed to model " + m.id);
    if (m.in_domain && !m.in_domain(u))
        fail(ErrorKind::Domain, "state outside the domain of model " + m.id);
}

} // namespace

VecXd ModelSpec::f(int j, const VecXd& u) const
{
    check_domain(*this, u);
    return flux(j, u);
}

MatXd ModelSpec::B(int j, int k, const VecXd& u) const
{
    check_domain(*this, u);
    return viscosity(j, k, u);
}

MatXd ModelSpec::Df(int j, const VecXd& u) const
{
    if (flux_jacobian) {
        check_domain(*this, u);
        return flux_jacobian(j, u);
    }
    MatXd J(n, n);
    for (int c = 0; c < n; ++c) {
        double h = 1e-6 * std::max(1.0, std::abs(u(c)));
        VecXd up = u, um = u;
        up(c) += h;
        um(c) -= h;
        J.col(c) = (f(j, up) - f(j, um)) / (2 * h);
    }
    return J;
}

MatXd ModelSpec::DB(int j, int k, const VecXd& u, const VecXd& v) const
{
    if (constant_viscosity)
        return MatXd::Zero(n, n);
    if (viscosity_derivative) {
        check_domain(*this, u);
        return viscosity_derivative(j, k, u, v);
    }
    double nv = v.norm();
    if (nv == 0)
        return MatXd::Zero(n, n);
    double h = 1e-6 * std::max(1.0, u.norm()) / nv;
    return (B(j, k, u + h * v) - B(j, k, u - h * v)) / (2 * h);
}

MatXd ModelSpec::B_nu(const VecXd& nu, const VecXd& u) const
{
    MatXd out = MatXd::Zero(n, n);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            if (nu(j) != 0 && nu(k) != 0)
                out += nu(j) * nu(k) * B(j, k, u);
    return out;
}

VecXd ModelSpec::f_nu(const VecXd& nu, const VecXd& u) const
{
    VecXd out = VecXd::Zero(n);
    for (int j = 0; j < d; ++j)
        if (nu(j) != 0)
            out += nu(j) * f(j, u);
    return out;
}

H1Report check_h1(const ModelSpec& model, const std::vector<VecXd>& states, int directions_per_dim)
{
    require(!states.empty(), "check_h1 needs at least one sample state");
    std::vector<VecXd> dirs;
    if (model.d == 1) {
        dirs.push_back(VecXd::Ones(1));
    } else {
        // deterministic quasi-uniform directions on the sphere (Fibonacci lattice)
        int count = directions_per_dim * model.d * model.d;
        for (int i = 0; i < count; ++i) {
            VecXd nu = VecXd::Zero(model.d);
            if (model.d == 2) {
                double th = pi * i / count;
                nu << std::cos(th), std::sin(th);
            } else {
                double z = 1.0 - (i + 0.5) / count;
                double r = std::sqrt(std::max(0.0, 1 - z * z));
                double ph = i * pi * (3.0 - std::sqrt(5.0));
                nu(0) = z;
                nu(1) = r * std::cos(ph);
                nu(2) = r * std::sin(ph);
                for (int k = 3; k < model.d; ++k)
                    nu(k) = 0; // higher dimensions: coordinate-plane sampling below
            }
            dirs.push_back(nu.normalized());
        }
        for (int k = 0; k < model.d; ++k)
            dirs.push_back(VecXd::Unit(model.d, k));
    }

    H1Report rep;
    rep.theta = std::numeric_limits<double>::infinity();
    for (const auto& u : states) {
        for (const auto& nu : dirs) {
            MatXd Bn = model.B_nu(nu, u);
            Eigen::EigenSolver<MatXd> es(Bn, false);
            double mre = es.eigenvalues().real().minCoeff();
            if (mre < rep.theta) {
                rep.theta = mre;
                rep.worst_state = u;
                rep.worst_nu = nu;
            }
        }
    }
    rep.pass = rep.theta > 0;
    return rep;
}

ModelSpec constant_coefficient(const std::vector<MatXd>& A, const std::vector<MatXd>& Bm)
{
    require(!A.empty(), "constant_coefficient needs at least one flux matrix");
    int d = static_cast<int>(A.size());
    int n = static_cast<int>(A[0].rows());
    require(static_cast<int>(Bm.size()) == d * d, "constant_coefficient needs d*d viscosity matrices");
    for (const auto& a : A)
        require(a.rows() == n && a.cols() == n, "flux matrices must be n x n");
    for (const auto& b : Bm)
        require(b.rows() == n && b.cols() == n, "viscosity matrices must be n x n");

    ModelSpec m;
    m.id = "const_coeff";
    m.n = n;
    m.d = d;
    m.constant_viscosity = true;
    m.flux = [A](int j, const VecXd& u) -> VecXd { return A[j] * u; };
    m.flux_jacobian = [A](int j, const VecXd&) -> MatXd { return A[j]; };
    m.viscosity = [Bm, d](int j, int k, const VecXd&) -> MatXd { return Bm[j * d + k]; };
    m.viscosity_derivative = [n](int, int, const VecXd&, const VecXd&) -> MatXd { return MatXd::Zero(n, n); };
    return m;
}

ModelSpec heat(int d, double kappa)
{
    require(d >= 1, "dimension must be positive");
    require(kappa > 0, "heat diffusivity must be positive");
    std::vector<MatXd> A(d, MatXd::Zero(1, 1));
    std::vector<MatXd> Bm(d * d, MatXd::Zero(1, 1));
    for (int j = 0; j < d; ++j)
        Bm[j * d + j](0, 0) = kappa;
    ModelSpec m = constant_coefficient(A, Bm);
    m.id = "heat";
    m.params["kappa"] = kappa;
    return m;
}

ModelSpec vdw_cubic(int d, double c3, double c1)
{
    require(d >= 1, "dimension must be positive");
    ModelSpec m;
    m.id = "vdw_cubic";
    m.n = 2;
    m.d = d;
    m.params = {{"c3", c3}, {"c1", c1}};
    m.constant_viscosity = true;
    m.flux = [c3, c1](int j, const VecXd& u) -> VecXd {
        VecXd out = VecXd::Zero(2);
        if (j == 0) {
            double t = u(0);
            out << -u(1), c3 * t * t * t - c1 * t;
        }
        return out;
    };
    m.flux_jacobian = [c3, c1](int j, const VecXd& u) -> MatXd {
        MatXd J = MatXd::Zero(2, 2);
        if (j == 0) {
            J(0, 1) = -1;
            J(1, 0) = 3 * c3 * u(0) * u(0) - c1;
        }
        return J;
    };
    m.viscosity = [](int j, int k, const VecXd&) -> MatXd {
        return j == k ? MatXd(MatXd::Identity(2, 2)) : MatXd(MatXd::Zero(2, 2));
    };
    m.viscosity_derivative = [](int, int, const VecXd&, const VecXd&) -> MatXd { return MatXd::Zero(2, 2); };
    return m;
}

ModelSpec scalar_viscous(int d, const ScalarViscousParams& p)
{
    require(d >= 1, "dimension must be positive");
    auto ts = p.transverse_speed;
    auto td = p.transverse_diffusion;
    ts.resize(d - 1, 0.0);
    td.resize(d - 1, 1.0);
    for (double k : td)
        require(k > 0, "transverse diffusion must be positive");

    ModelSpec m;
    m.id = "scalar_viscous";
    m.n = 1;
    m.d = d;
    m.params = {{"c", p.c}, {"beta", p.beta}, {"b0", p.b0}, {"b1", p.b1}};
    for (int j = 1; j < d; ++j) {
        m.params["a" + std::to_string(j)] = ts[j - 1];
        m.params["kappa" + std::to_string(j)] = td[j - 1];
    }
    m.constant_viscosity = p.b1 == 0.0;
    m.flux = [p, ts](int j, const VecXd& u) -> VecXd {
        VecXd out(1);
        out(0) = j == 0 ? p.c * u(0) + 0.5 * p.beta * u(0) * u(0) : ts[j - 1] * u(0);
        return out;
    };
    m.flux_jacobian = [p, ts](int j, const VecXd& u) -> MatXd {
        MatXd J(1, 1);
        J(0, 0) = j == 0 ? p.c + p.beta * u(0) : ts[j - 1];
        return J;
    };
    m.viscosity = [p, td](int j, int k, const VecXd& u) -> MatXd {
        MatXd B = MatXd::Zero(1, 1);
        if (j == k)
            B(0, 0) = j == 0 ? p.b0 + p.b1 * u(0) : td[j - 1];
        return B;
    };
    m.viscosity_derivative = [p](int j, int k, const VecXd&, const VecXd& v) -> MatXd {
        MatXd B = MatXd::Zero(1, 1);
        if (j == 0 && k == 0)
            B(0, 0) = p.b1 * v(0);
        return B;
    };
    if (p.b1 != 0.0) {
        double b0 = p.b0, b1 = p.b1;
        m.in_domain = [b0, b1](const VecXd& u) { return b0 + b1 * u(0) > 0; };
    }
    return m;
}

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& key, double dflt)
{
    auto it = p.find(key);
    return it == p.end() ? dflt : it->second;
}

} // namespace

ModelSpec make_model(const std::string& id, int d, const std::map<std::string, double>& params)
{
    if (id == "heat")
        return heat(d, param_or(params, "kappa", 1.0));
    if (id == "vdw_cubic")
        return vdw_cubic(d, param_or(params, "c3", 1.0), param_or(params, "c1", 1.0));
    if (id == "scalar_viscous") {
        ScalarViscousParams p;
        p.c = param_or(params, "c", 0.0);
        p.beta = param_or(params, "beta", 1.0);
        p.b0 = param_or(params, "b0", 1.0);
        p.b1 = param_or(params, "b1", 0.0);
        for (int j = 1; j < d; ++j) {
            p.transverse_speed.push_back(param_or(params, "a" + std::to_string(j), 0.0));
            p.transverse_diffusion.push_back(param_or(params, "kappa" + std::to_string(j), 1.0));
        }
        return scalar_viscous(d, p);
    }
    if (id == "const_coeff") {
        // keys: n, a{j}_{r}{c}, b{j}{k}_{r}{c} (all indices 0-based)
        int n = static_cast<int>(param_or(params, "n", 1.0));
        require(n >= 1 && n <= 9, "const_coeff needs 1 <= n <= 9");
        std::vector<MatXd> A(d, MatXd::Zero(n, n));
        std::vector<MatXd> Bm(d * d, MatXd::Zero(n, n));
        for (int j = 0; j < d; ++j)
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    A[j](r, c) = param_or(params, "a" + std::to_string(j) + "_" + std::to_string(r) + std::to_string(c), 0.0);
                    for (int k = 0; k < d; ++k) {
                        double dflt = (j == k && r == c) ? 1.0 : 0.0;
                        Bm[j * d + k](r, c) = param_or(params,
                            "b" + std::to_string(j) + std::to_string(k) + "_" + std::to_string(r) + std::to_string(c), dflt);
                    }
                }
        ModelSpec m = constant_coefficient(A, Bm);
        m.params = params;
        return m;
    }
    fail(ErrorKind::Domain, "unknown model id '" + id + "'");
}

} // namespace ptw
