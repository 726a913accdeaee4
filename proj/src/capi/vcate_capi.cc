#include "vcate/vcate.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "vcate/data_model.h"
#include "vcate/errors.h"
#include "vcate/gchisq.h"
#include "vcate/pipeline.h"
#include "vcate/simulation.h"
#include "vcate/welfare.h"

struct vcate_dataset {
  vcate::Dataset data;
};

struct vcate_result {
  vcate::EstimateResult result;
};

struct vcate_experiment {
  vcate::ExperimentReport report;
};

namespace {

thread_local std::string g_last_error;

template <class F>
int Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return VCATE_OK;
  } catch (const vcate::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return VCATE_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VCATE_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) vcate::Fail(vcate::ErrorCode::kInvalidArgument, what);
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* vcate_last_error(void) { return g_last_error.c_str(); }

const char* vcate_status_name(int status) {
  return vcate::ErrorCodeName(static_cast<vcate::ErrorCode>(status));
}

void vcate_string_free(char* s) { std::free(s); }

int vcate_dataset_create(const double* y, const int* d, const double* x, const double* pscore,
                         const int64_t* cluster_id, size_t n, size_t p, vcate_dataset** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = nullptr;
    Require(y != nullptr && d != nullptr && pscore != nullptr, "y, d and pscore are required");
    Require(p == 0 || x != nullptr, "x is null");
    auto ds = std::make_unique<vcate_dataset>();
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(p);
    ds->data.y = Eigen::Map<const Eigen::VectorXd>(y, rows);
    ds->data.pscore = Eigen::Map<const Eigen::VectorXd>(pscore, rows);
    ds->data.d.assign(d, d + n);
    ds->data.x.resize(rows, cols);
    if (p > 0) {
      ds->data.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                  Eigen::RowMajor>>(x, rows, cols);
    }
    if (cluster_id != nullptr) ds->data.cluster_id.emplace(cluster_id, cluster_id + n);
    *out = ds.release();
  });
}

void vcate_dataset_destroy(vcate_dataset* ds) { delete ds; }

int vcate_estimate(const vcate_dataset* ds, const char* options_json, vcate_result** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = nullptr;
    Require(ds != nullptr, "dataset is null");
    const vcate::EstimateOptions options =
        vcate::ParseEstimateOptions(options_json != nullptr ? options_json : "{}");
    auto r = std::make_unique<vcate_result>();
    r->result = vcate::RunEstimate(ds->data, options);
    *out = r.release();
  });
}

int vcate_result_estimate_json(const vcate_result* r, char** out) {
  return Guard([&] {
    Require(r != nullptr && out != nullptr, "null argument");
    *out = CopyString(r->result.EstimateJson());
  });
}

int vcate_result_test_json(const vcate_result* r, char** out) {
  return Guard([&] {
    Require(r != nullptr && out != nullptr, "null argument");
    *out = CopyString(r->result.TestJson());
  });
}

void vcate_result_destroy(vcate_result* r) { delete r; }

int vcate_welfare_bounds(double ate, double vcate, double* simple, double* general) {
  return Guard([&] {
    Require(simple != nullptr && general != nullptr, "null output");
    *simple = vcate::WelfareBoundSimple(vcate);
    *general = vcate::WelfareBoundGeneral(ate, vcate);
  });
}

int vcate_transform_bound(double ate, double vcate, double k1, double k2, double* out) {
  return Guard([&] {
    Require(out != nullptr, "null output");
    *out = vcate::TransformBound(ate, vcate, k1, k2);
  });
}

int vcate_adversarial_design(double ate, double vcate, double* p1, double* tau0, double* tau1) {
  return Guard([&] {
    Require(p1 != nullptr && tau0 != nullptr && tau1 != nullptr, "null output");
    const vcate::TwoPointDesign t = vcate::AdversarialDesign(ate, vcate);
    *p1 = t.p1;
    *tau0 = t.tau0;
    *tau1 = t.tau1;
  });
}

int vcate_gchisq_cdf(double v, double nu1, double kappa1, double kappa2, double* out) {
  return Guard([&] {
    Require(out != nullptr, "null output");
    *out = vcate::GchisqCdf(v, {nu1, kappa1, kappa2});
  });
}

int vcate_gchisq_quantile(double u, double nu1, double kappa1, double kappa2, double* out) {
  return Guard([&] {
    Require(out != nullptr, "null output");
    *out = vcate::GchisqQuantile(u, {nu1, kappa1, kappa2});
  });
}

int vcate_experiment_run(const char* config_json, vcate_experiment** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = nullptr;
    Require(config_json != nullptr, "config is null");
    auto e = std::make_unique<vcate_experiment>();
    e->report = vcate::RunExperiment(vcate::ParseExperimentConfig(config_json));
    *out = e.release();
  });
}

int vcate_experiment_summary_csv(const vcate_experiment* e, char** out) {
  return Guard([&] {
    Require(e != nullptr && out != nullptr, "null argument");
    *out = CopyString(e->report.SummaryCsv());
  });
}

int vcate_experiment_draws_csv(const vcate_experiment* e, char** out) {
  return Guard([&] {
    Require(e != nullptr && out != nullptr, "null argument");
    *out = CopyString(e->report.DrawsCsv());
  });
}

int vcate_experiment_summary_json(const vcate_experiment* e, char** out) {
  return Guard([&] {
    Require(e != nullptr && out != nullptr, "null argument");
    *out = CopyString(e->report.SummaryJson());
  });
}

void vcate_experiment_destroy(vcate_experiment* e) { delete e; }

}  // extern "C"
