#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lbro/bidiag.hpp"
#include "lbro/diagnostics.hpp"
#include "lbro/errors.hpp"
#include "lbro/experiments.hpp"
#include "lbro/generators.hpp"
#include "lbro/hbridge.hpp"
#include "lbro/lsqr.hpp"
#include "lbro/matrix_market.hpp"
#include "lbro/svdapprox.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace lbro;

namespace {

Precision precision_of(const std::string& s) {
    if (s == "double") return Precision::binary64;
    if (s == "single") return Precision::binary32;
    throw InvalidInput("precision must be 'double' or 'single'");
}

ReorthPolicy make_policy(const std::string& kind, double eta, double delta, double threshold, int passes,
                         bool local) {
    ReorthPolicy p;
    if (kind == "full") {
        p = ReorthPolicy::full(passes);
    } else if (kind == "none") {
        p = ReorthPolicy::none();
    } else if (kind == "onesided-u") {
        p = ReorthPolicy::one_sided(Side::Left, passes);
    } else if (kind == "onesided-v") {
        p = ReorthPolicy::one_sided(Side::Right, passes);
    } else if (kind == "partial") {
        p = ReorthPolicy::partial(eta, delta);
    } else if (kind == "semi") {
        p = ReorthPolicy::semi(threshold);
    } else {
        throw InvalidInput("unknown reorthogonalization '" + kind + "'");
    }
    p.passes = passes;
    p.include_local = local;
    p.validate();
    return p;
}

py::dict trace_dict(const DiagnosticsTrace& t) {
    std::vector<Index> k, eu, ev, ip;
    std::vector<double> mu, nu, ou, ov, lu, cb, xk;
    for (const TraceRow& r : t.rows) {
        k.push_back(r.k);
        mu.push_back(r.mu);
        nu.push_back(r.nu);
        ou.push_back(r.omega_u);
        ov.push_back(r.omega_v);
        lu.push_back(r.local_u);
        cb.push_back(r.norm_cbar);
        xk.push_back(r.normXk_over_normA);
        eu.push_back(r.reorth_events_u);
        ev.push_back(r.reorth_events_v);
        ip.push_back(r.inner_products_count);
    }
    return py::dict("k"_a = k, "mu"_a = mu, "nu"_a = nu, "omega_u"_a = ou, "omega_v"_a = ov, "local_u"_a = lu,
                    "norm_cbar"_a = cb, "normXk_over_normA"_a = xk, "reorth_events_u"_a = eu,
                    "reorth_events_v"_a = ev, "inner_products_count"_a = ip, "norm_a"_a = t.norm_a);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lanczos bidiagonalization with reorthogonalization and backward-error diagnostics";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::class_<LinearOperator>(m, "LinearOperator")
        .def_static(
            "dense", [](const Matrix& a, const std::string& p) { return LinearOperator::dense(a, precision_of(p)); },
            "a"_a, "precision"_a = "double")
        .def_static(
            "sparse",
            [](const SparseMatrix& a, const std::string& p) { return LinearOperator::sparse(a, precision_of(p)); },
            "a"_a, "precision"_a = "double")
        .def_property_readonly("shape", [](const LinearOperator& op) { return py::make_tuple(op.rows(), op.cols()); })
        .def_property_readonly("precision",
                               [](const LinearOperator& op) { return std::string(to_string(op.precision())); })
        .def_property_readonly("is_dense", &LinearOperator::is_dense)
        .def("matvec", &LinearOperator::apply, "x"_a)
        .def("rmatvec", &LinearOperator::apply_adjoint, "y"_a)
        .def("to_dense", &LinearOperator::to_dense)
        .def("norm", [](const LinearOperator& op) { return spectral_norm(op); });

    m.def("load_mtx", [](const std::string& path, const std::string& p) { return load_operator(path, precision_of(p)); },
          "path"_a, "precision"_a = "double");
    m.def("corpus_substitute",
          [](const std::string& name, const std::string& p) { return corpus_substitute(name, precision_of(p)); },
          "name"_a, "precision"_a = "double");
    m.def("corpus_names", [] {
        std::vector<std::string> names;
        for (const CorpusEntry& e : corpus()) names.push_back(e.name);
        return names;
    });
    m.def("section5_matrix", &generate_section5_matrix, "n"_a = 800);
    m.def("section5_singular_values", &section5_singular_values, "n"_a = 800);

    py::class_<ReorthPolicy>(m, "ReorthPolicy")
        .def(py::init(&make_policy), "kind"_a = "full", "eta"_a = 1e-10, "delta"_a = 0.0, "threshold"_a = 1.4901161193847656e-08,
             "passes"_a = 2, "local"_a = true)
        .def("__repr__", [](const ReorthPolicy& p) { return "ReorthPolicy(" + p.describe() + ")"; });

    py::class_<BidiagFactorization>(m, "Factorization")
        .def_readonly("k", &BidiagFactorization::k)
        .def_readonly("alphas", &BidiagFactorization::alphas)
        .def_readonly("betas", &BidiagFactorization::betas)
        .def_readonly("U", &BidiagFactorization::U)
        .def_readonly("V", &BidiagFactorization::V)
        .def_readonly("C", &BidiagFactorization::C)
        .def_readonly("D", &BidiagFactorization::D)
        .def_readonly("events_u", &BidiagFactorization::events_u)
        .def_readonly("events_v", &BidiagFactorization::events_v)
        .def_readonly("inner_products", &BidiagFactorization::inner_products)
        .def_property_readonly("status", [](const BidiagFactorization& f) { return to_string(f.status); })
        .def("B", [](const BidiagFactorization& f) { return f.B().to_dense(); })
        .def("fundamental_residual", [](const BidiagFactorization& f, const LinearOperator& op) {
            return fundamental_residual(f, op);
        });

    m.def(
        "bidiagonalize",
        [](const LinearOperator& op, const Vector& b, Index k, const ReorthPolicy& p) { return run(op, b, k, p); },
        "op"_a, "b"_a, "k"_a, "policy"_a = ReorthPolicy::full());
    m.def(
        "trace",
        [](const LinearOperator& op, const Vector& b, Index k, const ReorthPolicy& p, bool with_Xk) {
            TraceOptions o;
            o.with_Xk = with_Xk;
            return trace_dict(traced_run(op, b, k, p, o).trace);
        },
        "op"_a, "b"_a, "k"_a, "policy"_a = ReorthPolicy::full(), "with_Xk"_a = true);
    m.def(
        "compute_Xk",
        [](const BidiagFactorization& f, const LinearOperator& op) { return compute_Xk(f, op).normalized(); },
        "factorization"_a, "op"_a, "||X_k|| / ||A||");
    m.def("exact_equivalence_residual", &exact_equivalence_residual, "op"_a, "b"_a, "k"_a);
    m.def(
        "bidiag_svd",
        [](const Vector& diag, const Vector& sub) {
            LowerBidiagonal B{diag, sub};
            BidiagSvd s = bidiag_svd(B, VectorMode::Full);
            return py::make_tuple(s.H, s.theta, s.Z);
        },
        "diag"_a, "sub"_a, "returns (H, theta, Z) with B = H diag(theta) Z^T");
    m.def(
        "lsqr",
        [](const LinearOperator& op, const Vector& b, Index k, const ReorthPolicy& p, double atol) {
            LsqrOptions o;
            o.atol = atol;
            const LsqrResult r = lsqr_solve(op, b, k, p, o);
            std::vector<double> res, gap;
            for (const LsqrIterate& it : r.history) {
                res.push_back(it.residual_estimate);
                gap.push_back(it.oracle_gap);
            }
            return py::dict("x"_a = r.x, "k"_a = r.k, "converged"_a = r.converged, "residual_estimate"_a = res,
                            "oracle_gap"_a = gap);
        },
        "op"_a, "b"_a, "k"_a, "policy"_a = ReorthPolicy::full(), "atol"_a = 1e-12);
    m.def("orthogonality_level", &orthogonality_level, "Q"_a);
    m.def(
        "structure_report",
        [](const Matrix& q) {
            const StructureReport r = structure_report(q);
            return py::dict("M"_a = r.M, "S"_a = r.S, "norm_M"_a = r.norm_M, "norm_S"_a = r.norm_S,
                            "block_residual"_a = r.block_residual, "slack_unit"_a = r.slack_unit,
                            "slack_lower"_a = r.slack_lower, "slack_upper"_a = r.slack_upper);
        },
        "Q"_a);
    m.def(
        "table2",
        [](const std::string& p, Index n, Index k, Index k_small) {
            const Table2Values t = table2_values(precision_of(p), n, k, k_small);
            return py::dict("s1"_a = t.s1, "s2"_a = t.s2, "rel_err_s1"_a = t.rel_err_s1, "gap_s1_s2"_a = t.gap_s1_s2,
                            "s_min"_a = t.s_min, "rel_err_s_min"_a = t.rel_err_s_min, "gap_min"_a = t.gap_min);
        },
        "precision"_a = "double", "n"_a = 800, "k"_a = 100, "k_small"_a = 250);
}
