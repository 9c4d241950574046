#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "dichoteq/bounded.hpp"
#include "dichoteq/conjugacy.hpp"
#include "dichoteq/dichotomy.hpp"
#include "dichoteq/errors.hpp"
#include "dichoteq/lin_sys.hpp"
#include "dichoteq/sampling.hpp"
#include "dichoteq/scenarios.hpp"

namespace py = pybind11;
using namespace dichoteq;

namespace {

nlohmann::json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        nlohmann::json j = nlohmann::json::object();
        for (auto item : obj.cast<py::dict>())
            j[item.first.cast<std::string>()] = py_to_json(item.second);
        return j;
    }
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        nlohmann::json j = nlohmann::json::array();
        for (auto item : obj.cast<py::sequence>()) j.push_back(py_to_json(item));
        return j;
    }
    throw py::type_error("cannot convert python object to a JSON value");
}

py::object json_to_py(const nlohmann::json& j) {
    switch (j.type()) {
    case nlohmann::json::value_t::null: return py::none();
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return py::int_(j.get<long long>());
    case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
    case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
        py::list out;
        for (const auto& item : j) out.append(json_to_py(item));
        return out;
    }
    case nlohmann::json::value_t::object: {
        py::dict out;
        for (auto it = j.begin(); it != j.end(); ++it)
            out[py::str(it.key())] = json_to_py(it.value());
        return out;
    }
    default: throw py::type_error("unsupported JSON payload");
    }
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    Matrix A(n);
    for (int i = 0; i < n; ++i) {
        if (rows[static_cast<size_t>(i)].size() != static_cast<size_t>(n))
            throw InvalidParams("matrix rows must form a square matrix");
        for (int j = 0; j < n; ++j)
            A(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
    return A;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& A) {
    std::vector<std::vector<double>> rows(static_cast<size_t>(A.size()));
    for (int i = 0; i < A.size(); ++i) {
        rows[static_cast<size_t>(i)].resize(static_cast<size_t>(A.size()));
        for (int j = 0; j < A.size(); ++j)
            rows[static_cast<size_t>(i)][static_cast<size_t>(j)] = A(i, j);
    }
    return rows;
}

Seq seq_from_py(const py::handle& obj) {
    if (py::isinstance<py::float_>(obj) || py::isinstance<py::int_>(obj))
        return Seq::constant(obj.cast<double>());
    if (py::isinstance<py::dict>(obj)) return Seq::from_json(py_to_json(obj));
    if (py::isinstance<py::function>(obj)) {
        auto fn = obj.cast<py::function>();
        return Seq::from_function([fn](int n) { return fn(n).cast<double>(); });
    }
    throw py::type_error("sequence spec must be a number, a dict, or a callable");
}

py::dict cert_report_to_py(const CertReport& rep) {
    py::dict d;
    d["passed"] = rep.passed;
    d["max_violation"] = rep.max_violation;
    d["worst_pair"] = py::make_tuple(rep.worst_pair.first, rep.worst_pair.second);
    d["pairs_checked"] = rep.pairs_checked;
    d["tolerance"] = rep.tolerance;
    d["divergence_consistent"] = rep.trend.consistent;
    d["divergence_forward"] = rep.trend.forward_label;
    d["divergence_backward"] = rep.trend.backward_label;
    return d;
}

py::dict report_to_py(const VerificationReport& rep) {
    py::dict d;
    d["passed"] = rep.all_passed();
    d["summary"] = json_to_py(rep.summary());
    py::list rows;
    for (const CheckRow& row : rep.rows) {
        py::dict r;
        r["check"] = row.check;
        r["n"] = row.n;
        r["m"] = row.m;
        r["argument_hash"] = row.arg_hash;
        r["measured"] = row.measured;
        r["bound"] = row.bound;
        r["passed"] = row.passed;
        rows.append(r);
    }
    d["rows"] = rows;
    return d;
}

py::dict bounded_to_py(const BoundedSolution& sol) {
    py::dict d;
    d["first_index"] = sol.values.lo();
    py::list vals;
    for (const Vec& v : sol.values.vals) vals.append(py::cast(v));
    d["values"] = vals;
    d["residual"] = sol.residual;
    d["residual_interior"] = sol.residual_interior;
    d["sup_norm"] = sol.sup_norm;
    d["picard_iters"] = sol.picard_iters;
    d["tail_budget"] = sol.tail_budget;
    d["tail_at"] = py::cast(sol.tail_at);
    d["n_bound"] = sol.n_bound;
    d["within_n_bound"] = sol.within_n_bound;
    d["series_majorant"] = sol.series_majorant;
    d["theta"] = sol.theta;
    d["b_tilde"] = sol.b_tilde;
    d["contraction_ratios"] = py::cast(sol.contraction_ratios);
    return d;
}

Perturbation perturbation_from_callable(int dim, py::function fn, const py::handle& bound,
                                        const py::handle& lip) {
    Perturbation p;
    p.bound = seq_from_py(bound);
    p.lip = seq_from_py(lip);
    p.eval = [fn, dim](int n, const Vec& x) {
        Vec y = fn(n, x).cast<Vec>();
        if (y.size() != static_cast<size_t>(dim))
            throw InvalidParams("perturbation callable returned a vector of wrong size");
        return y;
    };
    return p;
}

} // namespace

PYBIND11_MODULE(_dichoteq, m) {
    m.doc() = "dichotomy certification and topological-equivalence maps for "
              "linear difference systems";

    py::register_exception<IndexOutOfWindow>(m, "IndexOutOfWindow", PyExc_IndexError);
    py::register_exception<SingularCoefficient>(m, "SingularCoefficient",
                                                PyExc_ArithmeticError);
    py::register_exception<BackwardNotContractive>(m, "BackwardNotContractive",
                                                   PyExc_ArithmeticError);
    py::register_exception<NoConvergence>(m, "NoConvergence", PyExc_ArithmeticError);
    py::register_exception<NotAProjection>(m, "NotAProjection", PyExc_ValueError);
    py::register_exception<CertificateRejected>(m, "CertificateRejected", PyExc_ValueError);
    py::register_exception<TailBudgetExceeded>(m, "TailBudgetExceeded",
                                               PyExc_ArithmeticError);
    py::register_exception<NotContractive>(m, "NotContractive", PyExc_ArithmeticError);
    py::register_exception<IterationCapExceeded>(m, "IterationCapExceeded",
                                                 PyExc_ArithmeticError);
    py::register_exception<WindowTooNarrow>(m, "WindowTooNarrow", PyExc_ValueError);
    py::register_exception<UnknownFamily>(m, "UnknownFamily", PyExc_ValueError);
    py::register_exception<InvalidParams>(m, "InvalidParams", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Window>(m, "Window")
        .def(py::init<int, int>(), py::arg("n_min"), py::arg("n_max"))
        .def_readonly("n_min", &Window::n_min)
        .def_readonly("n_max", &Window::n_max)
        .def("interior", &Window::interior, py::arg("frac") = 0.8)
        .def("__repr__", [](const Window& w) {
            return "Window(" + std::to_string(w.n_min) + ", " + std::to_string(w.n_max) +
                   ")";
        });

    py::class_<LinearSystem>(m, "LinearSystem")
        .def(py::init([](int dim, const Window& w, py::function gen, double cond_cap) {
                 return LinearSystem(
                     dim, w,
                     [gen](int n) {
                         return matrix_from_rows(
                             gen(n).cast<std::vector<std::vector<double>>>());
                     },
                     cond_cap);
             }),
             py::arg("dim"), py::arg("window"), py::arg("coeff"), py::arg("cond_cap") = 1e12,
             "coeff is a callable n -> row-major nested list")
        .def_property_readonly("dim", &LinearSystem::dim)
        .def_property_readonly("window", &LinearSystem::window)
        .def("coeff", [](const LinearSystem& s, int n) { return matrix_to_rows(s.coeff(n)); })
        .def("sup_deviation", &LinearSystem::sup_deviation)
        .def("rebuilt", &LinearSystem::rebuilt, py::arg("window"));

    py::class_<Perturbation>(m, "Perturbation")
        .def_static("zero", &Perturbation::zero, py::arg("dim"))
        .def_static("from_callable", &perturbation_from_callable, py::arg("dim"),
                    py::arg("eval"), py::arg("bound"), py::arg("lip"),
                    "eval is (n, x) -> list; bound and lip are sequence specs")
        .def("__call__", [](const Perturbation& p, int n, const Vec& x) { return p(n, x); })
        .def("bound_at", [](const Perturbation& p, int n) { return p.bound(n); })
        .def("lip_at", [](const Perturbation& p, int n) { return p.lip(n); });

    m.def(
        "make_perturbation",
        [](int dim, const py::dict& spec) { return make_perturbation(dim, py_to_json(spec)); },
        py::arg("dim"), py::arg("spec"));

    py::class_<DichotomyCertificate>(m, "DichotomyCertificate")
        .def_static(
            "generalized",
            [](const std::vector<std::vector<double>>& P, double K, const py::handle& a,
               int base_index) {
                return DichotomyCertificate::generalized(matrix_from_rows(P), K,
                                                         seq_from_py(a), base_index);
            },
            py::arg("P"), py::arg("K"), py::arg("a"), py::arg("base_index") = 0)
        .def_static(
            "with_alpha",
            [](const std::vector<std::vector<double>>& P, double K, double alpha,
               int base_index) {
                return DichotomyCertificate::with_alpha(matrix_from_rows(P), K, alpha,
                                                        base_index);
            },
            py::arg("P"), py::arg("K"), py::arg("alpha"), py::arg("base_index") = 0)
        .def_property_readonly("K", [](const DichotomyCertificate& c) { return c.K; })
        .def_property_readonly("alpha", [](const DichotomyCertificate& c) { return c.alpha; })
        .def_property_readonly("kind",
                               [](const DichotomyCertificate& c) {
                                   return c.kind == DichotomyCertificate::Kind::alpha
                                              ? "alpha"
                                              : "generalized";
                               })
        .def(
            "rate", [](const DichotomyCertificate& c, int j) { return c.a(j); }, py::arg("j"))
        .def("to_json", [](const DichotomyCertificate& c) { return json_to_py(c.to_json()); })
        .def_static("from_json", [](const py::dict& j) {
            return DichotomyCertificate::from_json(py_to_json(j));
        });

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_readonly("sys", &Scenario::sys)
        .def_readonly("cert", &Scenario::cert)
        .def_readonly("f", &Scenario::f)
        .def_readonly("g", &Scenario::g)
        .def_readonly("expected", &Scenario::expected)
        .def("with_window", &Scenario::with_window, py::arg("window"));

    m.def(
        "make_scenario",
        [](const std::string& name, const py::dict& params) {
            return make_scenario(name, py_to_json(params));
        },
        py::arg("name"), py::arg("params"));

    m.def(
        "transition",
        [](const LinearSystem& sys, int n, int mm) {
            return matrix_to_rows(transition(sys, n, mm));
        },
        py::arg("sys"), py::arg("n"), py::arg("m"));
    m.def(
        "propagate",
        [](const LinearSystem& sys, const Perturbation& f, int mm, const Vec& xi, int n) {
            return propagate(sys, f, mm, xi, n);
        },
        py::arg("sys"), py::arg("f"), py::arg("m"), py::arg("xi"), py::arg("n"));
    m.def(
        "solution_residual",
        [](const LinearSystem& sys, const Perturbation& f, const std::vector<Vec>& values,
           int first_index) {
            VecSeq seq;
            seq.first = first_index;
            seq.vals = values;
            return solution_residual(sys, f, seq);
        },
        py::arg("sys"), py::arg("f"), py::arg("values"), py::arg("first_index"));

    m.def(
        "verify_gdd",
        [](const LinearSystem& sys, const DichotomyCertificate& cert, double tol) {
            return cert_report_to_py(verify_gdd(sys, cert, tol));
        },
        py::arg("sys"), py::arg("cert"), py::arg("tol") = 1e-9);
    m.def(
        "verify_ed",
        [](const LinearSystem& sys, const DichotomyCertificate& cert, double tol) {
            return cert_report_to_py(verify_ed(sys, cert, tol));
        },
        py::arg("sys"), py::arg("cert"), py::arg("tol") = 1e-9);
    m.def(
        "green",
        [](const LinearSystem& sys, const DichotomyCertificate& cert, int n, int mm) {
            return matrix_to_rows(green(sys, cert, n, mm));
        },
        py::arg("sys"), py::arg("cert"), py::arg("n"), py::arg("m"));
    m.def(
        "n_operator",
        [](const DichotomyCertificate& cert, const py::handle& g, int n, const Window& w) {
            const NVal nv = n_operator(cert, seq_from_py(g), n, w);
            return py::make_tuple(nv.value, nv.tail);
        },
        py::arg("cert"), py::arg("g"), py::arg("n"), py::arg("window"));
    m.def(
        "check_h2_h3",
        [](const DichotomyCertificate& cert, const py::handle& F, const py::handle& G,
           const py::handle& r, const Window& w) {
            const H23Result h =
                check_h2_h3(cert, seq_from_py(F), seq_from_py(G), seq_from_py(r), w);
            py::dict d;
            d["B"] = h.B;
            d["B_tail"] = h.B_tail;
            d["theta"] = h.theta;
            d["theta_tail"] = h.theta_tail;
            d["passed"] = h.passed;
            return d;
        },
        py::arg("cert"), py::arg("F"), py::arg("G"), py::arg("r"), py::arg("window"));
    m.def(
        "stepanov_norm",
        [](const py::handle& r, int L, const Window& w) {
            return stepanov_norm(seq_from_py(r), L, w);
        },
        py::arg("r"), py::arg("L"), py::arg("window"));
    m.def(
        "alpha_rejection_scan",
        [](const DichotomyCertificate& cert, const std::vector<double>& alphas,
           const Window& w) {
            py::list out;
            for (const AlphaRejectionRow& row : alpha_rejection_scan(cert, alphas, w)) {
                py::dict d;
                d["alpha"] = row.alpha;
                d["found"] = row.found;
                d["m"] = row.m;
                d["T"] = row.T;
                d["average"] = row.average;
                out.append(d);
            }
            return out;
        },
        py::arg("cert"), py::arg("alphas"), py::arg("window"));

    m.def(
        "bounded_linear",
        [](const LinearSystem& sys, const DichotomyCertificate& cert,
           const std::vector<Vec>& q, int first_index) {
            VecSeq qs;
            qs.first = first_index;
            qs.vals = q;
            return bounded_to_py(bounded_linear(sys, cert, qs));
        },
        py::arg("sys"), py::arg("cert"), py::arg("q"), py::arg("first_index"),
        "q lists one forcing vector per coefficient index starting at first_index");
    m.def(
        "bounded_nonlinear",
        [](const LinearSystem& sys, const DichotomyCertificate& cert, py::function q,
           const py::handle& Q, const py::handle& r, double eps) {
            auto qq = [q](int n, const Vec& z) { return q(n, z).cast<Vec>(); };
            return bounded_to_py(
                bounded_nonlinear(sys, cert, qq, seq_from_py(Q), seq_from_py(r), eps));
        },
        py::arg("sys"), py::arg("cert"), py::arg("q"), py::arg("Q"), py::arg("r"),
        py::arg("eps") = 1e-9);
    m.def(
        "oracle_bounded",
        [](const LinearSystem& sys, const DichotomyCertificate& cert,
           const std::vector<Vec>& q, int first_index, const Window& w) {
            VecSeq qs;
            qs.first = first_index;
            qs.vals = q;
            const VecSeq out = oracle_bounded(sys, cert, qs, w);
            return py::make_tuple(out.lo(), py::cast(out.vals));
        },
        py::arg("sys"), py::arg("cert"), py::arg("q"), py::arg("first_index"),
        py::arg("window"));

    py::class_<ConjugacyEngine>(m, "ConjugacyEngine")
        .def(py::init([](const LinearSystem& sys, const DichotomyCertificate& cert,
                         const Perturbation& f, const Perturbation& g, double eps,
                         double cert_tol) {
                 EngineOpts opts;
                 opts.eps = eps;
                 opts.cert_tol = cert_tol;
                 return ConjugacyEngine(sys, cert, f, g, opts);
             }),
             py::arg("sys"), py::arg("cert"), py::arg("f"), py::arg("g"),
             py::arg("eps") = 1e-9, py::arg("cert_tol") = 1e-9)
        .def_property_readonly("B", &ConjugacyEngine::B)
        .def_property_readonly("B_tail", &ConjugacyEngine::B_tail)
        .def_property_readonly("theta", &ConjugacyEngine::theta)
        .def_property_readonly("theta_tail", &ConjugacyEngine::theta_tail)
        .def_property_readonly("backward_admissible", &ConjugacyEngine::backward_admissible)
        .def("chi", &ConjugacyEngine::chi, py::arg("n"), py::arg("m"), py::arg("xi"))
        .def("vartheta", &ConjugacyEngine::vartheta, py::arg("n"), py::arg("m"),
             py::arg("nu"))
        .def("H", &ConjugacyEngine::H, py::arg("n"), py::arg("xi"))
        .def("L", &ConjugacyEngine::L, py::arg("n"), py::arg("nu"))
        .def("swapped", &ConjugacyEngine::swapped);

    m.def(
        "verify_equivalence",
        [](const ConjugacyEngine& engine, uint64_t seed, int num_points, int num_solutions,
           double xi_radius, bool fault_injection) {
            Sampler sampler(seed);
            EquivalenceOpts opts;
            opts.num_points = num_points;
            opts.num_solutions = num_solutions;
            opts.xi_radius = xi_radius;
            opts.fault_injection = fault_injection;
            return report_to_py(verify_equivalence(engine, sampler, opts));
        },
        py::arg("engine"), py::arg("seed") = 42, py::arg("num_points") = 50,
        py::arg("num_solutions") = 5, py::arg("xi_radius") = 2.0,
        py::arg("fault_injection") = false);
    m.def(
        "verify_flow_identity",
        [](const ConjugacyEngine& engine, uint64_t seed, int num_samples, int max_offset,
           double tol) {
            Sampler sampler(seed);
            FlowIdentityOpts opts;
            opts.num_samples = num_samples;
            opts.max_offset = max_offset;
            opts.tol = tol;
            return report_to_py(verify_flow_identity(engine, sampler, opts));
        },
        py::arg("engine"), py::arg("seed") = 42, py::arg("num_samples") = 20,
        py::arg("max_offset") = 5, py::arg("tol") = 1e-6);
    m.def("gronwall_bound", &gronwall_bound, py::arg("sys"), py::arg("f"), py::arg("k"),
          py::arg("n"), py::arg("delta"));
    m.def("gamma", &dichoteq::gamma, py::arg("engine"), py::arg("n"), py::arg("ell"));
    m.def(
        "holder_params",
        [](double K, double F, double G, double alpha, double M, double r) {
            const HolderParams hp = holder_params(K, F, G, alpha, M, r);
            py::dict d;
            d["alpha"] = hp.alpha;
            d["theta"] = hp.theta;
            d["B"] = hp.B;
            d["D1"] = hp.D1;
            d["D2"] = hp.D2;
            d["exponent"] = hp.exponent;
            d["applicable"] = hp.applicable;
            return d;
        },
        py::arg("K"), py::arg("F"), py::arg("G"), py::arg("alpha"), py::arg("M"),
        py::arg("r"));
    m.def(
        "continuity_modulus",
        [](const ConjugacyEngine& engine, int n, const Vec& xi,
           const std::vector<double>& deltas, const std::vector<Vec>& directions) {
            const ModulusTable t = continuity_modulus(engine, n, xi, deltas, directions);
            py::list rows;
            for (const ModulusRow& row : t.rows) {
                py::dict d;
                d["delta"] = row.delta;
                d["direction"] = row.direction;
                d["measured"] = row.measured;
                rows.append(d);
            }
            py::dict out;
            out["rows"] = rows;
            out["fitted_slope"] = t.fitted_slope;
            return out;
        },
        py::arg("engine"), py::arg("n"), py::arg("xi"), py::arg("deltas"),
        py::arg("directions"));
}
