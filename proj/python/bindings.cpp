#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vgchaos/chaos2.hpp"
#include "vgchaos/empirical.hpp"
#include "vgchaos/errors.hpp"
#include "vgchaos/stein.hpp"
#include "vgchaos/tensorq.hpp"
#include "vgchaos/vgdist.hpp"

namespace py = pybind11;
using namespace vgchaos;

#define STR_(x) #x
#define STR(x) STR_(x)

namespace {

py::array_t<double> to_array(std::vector<double> v) {
  auto* heap = new std::vector<double>(std::move(v));
  py::capsule owner(heap, [](void* p) { delete static_cast<std::vector<double>*>(p); });
  return py::array_t<double>(heap->size(), heap->data(), owner);
}

std::vector<double> to_vector(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  return {a.data(), a.data() + a.size()};
}

py::dict report_dict(const BoundReport& r) {
  py::dict terms, errs;
  for (const auto& t : r.terms) {
    terms[py::str(t.name)] = t.value;
    errs[py::str(t.name)] = t.std_error;
  }
  py::dict d;
  d["kind"] = r.kind;
  d["terms"] = terms;
  d["std_errors"] = errs;
  d["total"] = r.total;
  d["interior_negative"] = r.interior_negative;
  return d;
}

SymTensor make_symtensor(int q, int dim, py::array_t<double, py::array::c_style | py::array::forcecast> data) {
  return SymTensor(Tensor(q, dim, to_vector(data)));
}

template <class F>
py::array_t<double> elementwise(F fn, py::array_t<double, py::array::forcecast> x) {
  py::array_t<double> out(x.request().shape);
  const double* in = x.data();
  double* o = out.mutable_data();
  for (py::ssize_t i = 0; i < x.size(); ++i) o[i] = fn(in[i]);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Variance-Gamma approximation of Wiener chaos functionals";
#ifdef VERSION_INFO
  m.attr("__version__") = STR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif

  py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_ValueError);
  py::register_exception<PoleAtLocation>(m, "PoleAtLocation", PyExc_ValueError);
  py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<VGParams>(m, "VGParams")
      .def(py::init<double, double, double, double, std::string>(), py::arg("r"),
           py::arg("theta") = 0.0, py::arg("sigma") = 1.0, py::arg("mu") = 0.0,
           py::arg("origin") = "custom")
      .def_readwrite("r", &VGParams::r)
      .def_readwrite("theta", &VGParams::theta)
      .def_readwrite("sigma", &VGParams::sigma)
      .def_readwrite("mu", &VGParams::mu)
      .def_readwrite("origin", &VGParams::origin)
      .def("mean", &VGParams::mean)
      .def("variance", &VGParams::variance)
      .def("centered", &VGParams::centered)
      .def("__repr__", [](const VGParams& p) {
        return "VGParams(r=" + std::to_string(p.r) + ", theta=" + std::to_string(p.theta) +
               ", sigma=" + std::to_string(p.sigma) + ", mu=" + std::to_string(p.mu) + ")";
      });

  m.def("laplace", &special::laplace, py::arg("b"));
  m.def("sym_gamma", &special::sym_gamma, py::arg("lam"), py::arg("r"));
  m.def("special_case", [](const std::string& kind, std::vector<double> args) {
    return special_case(kind, args);
  });

  m.def("vg_density", [](const VGParams& p, py::array_t<double, py::array::forcecast> x) {
    return elementwise([&](double v) { return vg_density(p, v); }, x);
  });
  m.def("vg_cdf", [](const VGParams& p, py::array_t<double, py::array::forcecast> x) {
    return elementwise([&](double v) { return vg_cdf(p, v); }, x);
  });
  m.def("vg_quantile", [](const VGParams& p, py::array_t<double, py::array::forcecast> u) {
    return elementwise([&](double v) { return vg_quantile(p, v); }, u);
  });
  m.def("vg_cumulants", [](const VGParams& p) { return vg_cumulants(p).kappa; });
  m.def("vg_moments", &vg_moments);
  m.def("vg_sample", [](const VGParams& p, std::size_t n, std::uint64_t seed) {
    return to_array(vg_sample(p, n, seed));
  }, py::arg("params"), py::arg("n"), py::arg("seed"));
  m.def("vg_expectation", [](const VGParams& p, const std::function<double(double)>& f) {
    return vg_expectation(p, f);
  });

  py::class_<Kernel2>(m, "Kernel2")
      .def(py::init<const Eigen::MatrixXd&>())
      .def_static("diagonal", [](std::vector<double> d) { return Kernel2::diagonal(d); })
      .def_property_readonly("matrix", &Kernel2::matrix)
      .def_property_readonly("dim", &Kernel2::dim)
      .def("trace_power", &Kernel2::trace_power);

  m.def("cumulants2", [](const Kernel2& a) { return cumulants2(a).kappa; });
  m.def("sample_chaos2", [](const Kernel2& a, std::size_t n, std::uint64_t seed) {
    return to_array(sample_chaos2(a, n, seed));
  });
  m.def("exact_symgamma_kernel", [](int mm, double lam) {
    return exact_symgamma_kernel(mm, lam).embed();
  }, py::arg("m"), py::arg("lam"));
  m.def("vg_bound2", [](const Kernel2& a, const VGParams& t) { return report_dict(vg_bound2(a, t)); });
  m.def("gauss_bound2", [](const Kernel2& a, double v) { return report_dict(gauss_bound2(a, v)); });
  m.def("cov_squares", &cov_squares);

  py::class_<SymTensor>(m, "SymTensor")
      .def(py::init(&make_symtensor), py::arg("q"), py::arg("dim"), py::arg("data"))
      .def_property_readonly("order", &SymTensor::order)
      .def_property_readonly("dim", &SymTensor::dim)
      .def("norm", &SymTensor::norm)
      .def_property_readonly("data", [](const SymTensor& f) { return to_array(f.tensor().data()); });
  m.def("random_symtensor", &random_symtensor, py::arg("q"), py::arg("dim"), py::arg("seed"));
  m.def("from_kernel2", &from_kernel2);
  m.def("gamma3_second_moment", &gamma3_second_moment);
  m.def("third_moment", &third_moment);
  m.def("vg_contraction_bound", [](const SymTensor& f, const VGParams& t) {
    return report_dict(vg_contraction_bound(f, t));
  });
  m.def("symgamma_contraction_bound", &symgamma_contraction_bound);
  m.def("mixed_sum_bound", [](const SymTensor& f1, const SymTensor& f2, double lam) {
    return report_dict(mixed_sum_bound(f1, f2, lam));
  });
  m.def("sample_multiple_integrals", [](const SymTensor& f, std::size_t n, std::uint64_t seed) {
    return to_array(sample_multiple_integrals(f, n, seed));
  });

  py::class_<SteinConstants>(m, "SteinConstants")
      .def_readonly("c0", &SteinConstants::c0)
      .def_readonly("c1", &SteinConstants::c1)
      .def_readonly("c2_1", &SteinConstants::c2_1)
      .def_readonly("c2_2", &SteinConstants::c2_2);
  m.def("stein_constants", &stein_constants, py::arg("lam"), py::arg("r"));
  m.def("residual_symgamma_monomial", [](double lam, double r, int k) {
    return residual_symgamma(lam, r, monomial(k));
  });
  m.def("residual_vg_monomial", [](const VGParams& p, int k) { return residual_vg(p, monomial(k)); });
  m.def("solve_stein", [](const VGParams& p, std::function<double(double)> h) {
    const auto s = solve_stein(p, std::move(h));
    std::vector<double> x, f, df, d2f;
    for (const auto& pt : s.table()) {
      x.push_back(pt.x);
      f.push_back(pt.f);
      df.push_back(pt.df);
      d2f.push_back(pt.d2f);
    }
    py::dict d;
    d["x"] = to_array(std::move(x));
    d["f"] = to_array(std::move(f));
    d["df"] = to_array(std::move(df));
    d["d2f"] = to_array(std::move(d2f));
    d["expectation"] = s.expectation();
    d["residual_sup"] = s.residual_sup();
    return d;
  });

  m.def("wasserstein_1d", [](py::array_t<double> a, py::array_t<double> b) {
    const auto va = to_vector(a), vb = to_vector(b);
    return wasserstein_1d(std::span<const double>(va), std::span<const double>(vb));
  });
  m.def("wasserstein_to_vg", [](py::array_t<double> s, const VGParams& p) {
    const auto v = to_vector(s);
    return wasserstein_to_vg(std::span<const double>(v), p);
  });
  m.def("k_statistics", [](py::array_t<double> s, int batches) {
    const auto v = to_vector(s);
    const auto k = k_statistics(std::span<const double>(v), batches);
    return py::make_tuple(k.kappa.kappa, k.std_error);
  }, py::arg("values"), py::arg("batches") = 50);
}
