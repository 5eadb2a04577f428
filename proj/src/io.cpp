#include "sampdes/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace sampdes {

using nlohmann::ordered_json;

namespace {

std::ofstream open_for_write(const std::string& path, const char* who) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(std::string(who) + ": cannot write " + path);
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buf, ptr);
}

void write_result_json(const SolverResult& result, const std::string& path) {
  ordered_json j;
  j["selected"] = result.selected;
  j["w_rounded"] = result.w_rounded.w;
  j["w_averaged"] = result.w_averaged.w;
  j["best_dual"] = result.best_dual;
  j["primal_rounded"] = result.primal_rounded;
  j["gap"] = result.gap;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["singular_flag"] = result.singular_flag;
  auto out = open_for_write(path, "write_result_json");
  out << j.dump(2) << '\n';
}

void write_trace_csv(const SolverResult& result, const std::string& path) {
  auto out = open_for_write(path, "write_trace_csv");
  out << "iter,alpha,dual_value,best_dual,primal_rounded,gap,"
         "max_projection_residual,singular_flag\n";
  for (const TraceRecord& r : result.trace) {
    out << r.iter << ',' << format_double(r.alpha) << ',' << format_double(r.dual_value)
        << ',' << format_double(r.best_dual) << ',' << format_double(r.primal_rounded)
        << ',' << format_double(r.gap) << ',' << format_double(r.max_projection_residual)
        << ',' << (r.singular_flag ? 1 : 0) << '\n';
  }
}

void write_oracle_json(const OracleResult& result, const std::string& path) {
  ordered_json j;
  j["best_subset"] = result.best_subset;
  j["best_value"] = result.best_value;
  j["evaluated"] = result.evaluated;
  j["singular_skipped"] = result.singular_skipped;
  j["ties"] = result.ties;
  auto out = open_for_write(path, "write_oracle_json");
  out << j.dump(2) << '\n';
}

}  // namespace sampdes
