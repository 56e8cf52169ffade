// Python module: compile DSL directories, generate code, run the oracle, drive projects.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gamacro/codegen.hpp"
#include "gamacro/driver.hpp"
#include "gamacro/oracle_run.hpp"

namespace py = pybind11;
using namespace gamacro;

namespace {

py::dict to_dict(const Diagnostic& d) {
  py::dict r;
  r["severity"] = d.severity;
  r["code"] = d.code;
  r["message"] = d.message;
  r["file"] = d.span.file;
  r["line"] = d.span.line;
  r["col"] = d.span.col;
  return r;
}

py::list to_list(const std::vector<Diagnostic>& ds) {
  py::list r;
  for (const auto& d : ds) r.append(to_dict(d));
  return r;
}

py::dict to_dict(const codegen::VerifyReport& v) {
  py::dict r;
  r["pass"] = v.pass();
  r["samples"] = v.samples;
  r["skipped"] = v.skipped;
  r["failures"] = v.failures;
  r["max_error"] = v.max_error;
  r["message"] = v.message;
  return r;
}

using Bindings = std::optional<std::vector<std::vector<std::string>>>;

class Project {
 public:
  explicit Project(const std::string& dsl_dir) : r_(compile_directory(dsl_dir)) {}

  bool ok() const { return r_.ok(); }
  py::list diagnostics() const { return to_list(r_.diagnostics); }

  std::vector<std::string> names(int what) const {
    std::vector<std::string> out;
    const auto& p = project();
    if (what == 0)
      for (const auto& [k, v] : p.frames) out.push_back(k);
    else if (what == 1)
      for (const auto& [k, v] : p.macros) out.push_back(k);
    else
      for (const auto& [k, v] : p.bindings) out.push_back(k);
    return out;
  }

  // [(name, frame, [blade, ...]), ...] for the inputs or outputs of a macro
  py::list params(const std::string& macro, bool outputs) const {
    const auto& m = project().macro(macro);
    py::list r;
    for (const auto& prm : outputs ? m.outputs : m.inputs) {
      const auto& f = m.regs[prm.reg].frame;
      std::vector<std::string> blades;
      if (prm.cls)
        for (BladeId b : prm.cls->blades) blades.push_back(f->blade_name(b));
      r.append(py::make_tuple(prm.name, f->name(), blades));
    }
    return r;
  }

  py::dict generate(const std::string& macro, const Bindings& bindings, const std::string& dialect, bool strict,
                    bool emit_zeros) const {
    auto bp = point(macro, bindings);
    codegen::Options opt;
    opt.strict = strict;
    opt.emit_zeros = emit_zeros;
    auto r = codegen::generate_point(project(), bp, codegen::make_dialect(dialect), opt);
    py::dict out;
    out["ok"] = r.ok;
    out["body"] = r.body;
    out["diagnostics"] = to_list(r.diagnostics);
    out["assignments"] = r.sequence.count(codegen::Assignment::Kind::Output);
    out["temporaries"] = r.sequence.temporaries();
    out["op_count"] = r.sequence.op_count();
    out["unoptimized_op_count"] = r.unoptimized.op_count();
    return out;
  }

  py::dict verify(const std::string& macro, const Bindings& bindings, int samples, std::uint64_t seed,
                  double tolerance) const {
    auto bp = point(macro, bindings);
    auto r = codegen::generate_point(project(), bp, codegen::make_dialect("neutral"));
    if (!r.ok) throw Error(r.diagnostics.empty() ? "GenerationFailed" : r.diagnostics[0].code,
                           r.diagnostics.empty() ? "generation failed" : r.diagnostics[0].message);
    return to_dict(codegen::verify_point(project(), bp, r.sequence, samples, seed, tolerance));
  }

  // inputs: {param: {blade: value}}; returns the nonzero output coefficients the same way
  std::map<std::string, std::map<std::string, double>> run(
      const std::string& macro, const std::map<std::string, std::map<std::string, double>>& inputs) const {
    const auto& m = project().macro(macro);
    std::map<std::string, oracle::NumMultivector> in;
    for (const auto& prm : m.inputs) {
      const auto& f = m.regs[prm.reg].frame;
      oracle::NumMultivector v(oracle::num_frame(f));
      if (auto it = inputs.find(prm.name); it != inputs.end())
        for (const auto& [blade, x] : it->second) v[f->parse_blade(blade)] = x;
      in.emplace(prm.name, v);
    }
    std::map<std::string, std::map<std::string, double>> out;
    auto result = oracle::run_macro(m, in);
    for (const auto& prm : m.outputs) {
      const auto& v = result.at(prm.name);
      const auto& f = *m.regs[prm.reg].frame;
      auto& o = out[prm.name];
      for (std::uint32_t b = 0; b < v.coefs().size(); ++b)
        if (v[b] != 0.0) o[f.blade_name(b)] = v[b];
    }
    return out;
  }

 private:
  const CompiledProject& project() const {
    if (!r_.ok()) {
      const auto& d = r_.diagnostics.front();
      throw Error(d.code, d.message, d.span);
    }
    return *r_.project;
  }

  codegen::BindingPoint point(const std::string& macro, const Bindings& bindings) const {
    if (!bindings) return codegen::bind_all(project(), macro);
    std::string text = "// GMac : " + macro + "\n";
    for (const auto& b : *bindings) {
      if (b.size() != 2 && b.size() != 3) throw Error("MalformedBinding", "a binding has 2 or 3 strings");
      text += "// GMac.Bind(";
      for (std::size_t i = 0; i < b.size(); ++i) text += (i ? ", \"" : "\"") + b[i] + "\"";
      text += ")\n";
    }
    text += "// GMac end\n";
    auto scan = codegen::scan_source(text, codegen::make_dialect("neutral"), "<bindings>");
    for (const auto& d : scan.diagnostics)
      if (d.severity == "error") throw Error(d.code, d.message, d.span);
    return scan.points.at(0);
  }

  CompileResult r_;
};

// Runs a driver command; returns (exit_status, json_lines).
std::pair<int, std::vector<std::string>> run_project(const std::string& command, const std::string& path,
                                                     const py::dict& overrides) {
  auto c = driver::load_config(path);
  if (overrides.contains("dialect")) c.dialect = overrides["dialect"].cast<std::string>();
  if (overrides.contains("mirror")) c.mirror = overrides["mirror"].cast<std::string>();
  if (overrides.contains("strict")) c.strict = overrides["strict"].cast<bool>();
  if (overrides.contains("emit_zeros")) c.emit_zeros = overrides["emit_zeros"].cast<bool>();
  if (overrides.contains("verify")) c.verify = overrides["verify"].cast<bool>();
  if (overrides.contains("samples")) c.samples = overrides["samples"].cast<int>();
  if (overrides.contains("seed")) c.seed = overrides["seed"].cast<std::uint64_t>();
  if (overrides.contains("jobs")) c.jobs = overrides["jobs"].cast<int>();
  driver::RunResult r;
  {
    py::gil_scoped_release release;
    if (command == "check") r = driver::check(c);
    else if (command == "generate") r = driver::generate(c);
    else if (command == "verify") r = driver::verify(c);
    else throw Error("UnknownCommand", "unknown command " + command);
  }
  std::vector<std::string> lines;
  for (const auto& d : r.diagnostics) lines.push_back(driver::json_line(d));
  for (const auto& p : r.points) lines.push_back(driver::json_line(p));
  lines.push_back(driver::json_line(r.stats, true));
  return {r.has_errors() ? 1 : 0, lines};
}

}  // namespace

PYBIND11_MODULE(_gamacro, m) {
  m.doc() = "Geometric-algebra macro compiler";
  static py::exception<Error> error(m, "GamacroError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object args = py::make_tuple(e.code(), e.what(), e.loc().file, e.loc().line, e.loc().col);
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  py::class_<Project>(m, "Project")
      .def(py::init<const std::string&>(), py::arg("dsl_dir"))
      .def_property_readonly("ok", &Project::ok)
      .def_property_readonly("diagnostics", &Project::diagnostics)
      .def_property_readonly("frames", [](const Project& p) { return p.names(0); })
      .def_property_readonly("macros", [](const Project& p) { return p.names(1); })
      .def_property_readonly("bindings", [](const Project& p) { return p.names(2); })
      .def("inputs", [](const Project& p, const std::string& m) { return p.params(m, false); }, py::arg("macro"))
      .def("outputs", [](const Project& p, const std::string& m) { return p.params(m, true); }, py::arg("macro"))
      .def("generate", &Project::generate, py::arg("macro"), py::arg("bindings") = py::none(),
           py::arg("dialect") = "neutral", py::arg("strict") = false, py::arg("emit_zeros") = false)
      .def("verify", &Project::verify, py::arg("macro"), py::arg("bindings") = py::none(), py::arg("samples") = 200,
           py::arg("seed") = 1, py::arg("tolerance") = 1e-9)
      .def("run", &Project::run, py::arg("macro"), py::arg("inputs"));

  m.def(
      "interpret",
      [](const std::string& body, const std::map<std::string, double>& env, const std::string& dialect) {
        return codegen::interpret(codegen::parse_generated(body, codegen::make_dialect(dialect)), env);
      },
      py::arg("body"), py::arg("env"), py::arg("dialect") = "neutral");
  m.def("_run_project", &run_project);
}
