#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <span>

#include "icondet/autoencoder.hpp"
#include "icondet/classifiers.hpp"
#include "icondet/clustering.hpp"
#include "icondet/features.hpp"
#include "icondet/icons.hpp"
#include "icondet/pe.hpp"
#include "icondet/png_codec.hpp"

namespace py = pybind11;
using namespace icondet;

namespace {

std::span<const std::uint8_t> as_span(const py::bytes& data) {
  char* buffer = nullptr;
  Py_ssize_t length = 0;
  if (PYBIND11_BYTES_AS_STRING_AND_SIZE(data.ptr(), &buffer, &length) != 0) {
    throw py::error_already_set();
  }
  return {reinterpret_cast<const std::uint8_t*>(buffer), static_cast<std::size_t>(length)};
}

py::array_t<std::uint8_t> icon_to_array(const IconRaster& icon) {
  py::array_t<std::uint8_t> out({icon.height, icon.width, 4});
  std::memcpy(out.mutable_data(), icon.pixels.data(), icon.pixels.size());
  return out;
}

IconRaster icon_from_array(const py::array_t<std::uint8_t>& rgba) {
  const auto buf = rgba.request();
  if (buf.ndim != 3 || buf.shape[2] != 4) {
    throw py::value_error("expected an (H, W, 4) uint8 array");
  }
  IconRaster icon;
  icon.height = static_cast<int>(buf.shape[0]);
  icon.width = static_cast<int>(buf.shape[1]);
  const auto contiguous = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>(rgba);
  icon.pixels.assign(contiguous.data(), contiguous.data() + contiguous.size());
  return icon;
}

RgbImage rgb_from_array(const py::array_t<double>& img) {
  const auto arr = py::array_t<double, py::array::c_style | py::array::forcecast>(img);
  const auto buf = arr.request();
  if (buf.ndim != 3 || buf.shape[2] != 3) {
    throw py::value_error("expected an (H, W, 3) float array");
  }
  RgbImage out;
  out.height = static_cast<int>(buf.shape[0]);
  out.width = static_cast<int>(buf.shape[1]);
  const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
  out.r.resize(n);
  out.g.resize(n);
  out.b.resize(n);
  const double* data = arr.data();
  for (std::size_t i = 0; i < n; ++i) {
    out.r[i] = data[3 * i + 0];
    out.g[i] = data[3 * i + 1];
    out.b[i] = data[3 * i + 2];
  }
  return out;
}

py::array_t<double> rgb_to_array(const RgbImage& img) {
  py::array_t<double> out({img.height, img.width, 3});
  double* data = out.mutable_data();
  for (std::size_t i = 0; i < img.r.size(); ++i) {
    data[3 * i + 0] = img.r[i];
    data[3 * i + 1] = img.g[i];
    data[3 * i + 2] = img.b[i];
  }
  return out;
}

Matrix matrix_from_array(const py::array_t<double>& arr) {
  const auto a = py::array_t<double, py::array::c_style | py::array::forcecast>(arr);
  const auto buf = a.request();
  if (buf.ndim != 2) throw py::value_error("expected a 2-D float array");
  Matrix m(static_cast<std::size_t>(buf.shape[0]), static_cast<std::size_t>(buf.shape[1]));
  std::memcpy(m.data().data(), a.data(), sizeof(double) * m.rows() * m.cols());
  return m;
}

py::array_t<double> matrix_to_array(const Matrix& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::memcpy(out.mutable_data(), m.data().data(), sizeof(double) * m.rows() * m.cols());
  return out;
}

template <std::size_t N>
py::array_t<double> vector_to_array(const std::array<double, N>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(N));
  std::memcpy(out.mutable_data(), v.data(), sizeof(double) * N);
  return out;
}

py::array_t<double> vector_to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::memcpy(out.mutable_data(), v.data(), sizeof(double) * v.size());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "icon-aware PE malware detection pipeline (native core)";

  // domain errors surface as ValueError
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const PeError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const IconError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const FeatureError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const AeError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ClusterError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ClassifierError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  // --- pe_ingest ---
  py::class_<SectionRecord>(m, "Section")
      .def_readonly("name", &SectionRecord::name)
      .def_readonly("misc_virtual_size", &SectionRecord::misc_virtual_size)
      .def_readonly("size_of_raw_data", &SectionRecord::size_of_raw_data)
      .def_property_readonly("raw_bytes", [](const SectionRecord& s) {
        return py::bytes(reinterpret_cast<const char*>(s.raw_bytes.data()), s.raw_bytes.size());
      });

  py::class_<PeSummary>(m, "PeSummary")
      .def_readonly("is_valid_pe", &PeSummary::is_valid_pe)
      .def_readonly("sections", &PeSummary::sections)
      .def("has_resources", &PeSummary::has_resources)
      .def("pefile_features",
           [](const PeSummary& pe) { return vector_to_array(pefile_features(pe)); });

  m.def("parse_pe", [](const py::bytes& data) { return parse_pe(as_span(data)); },
        "Parse a PE image (raises ValueError on malformed input)");
  m.def("section_entropy",
        [](const py::bytes& data) { return section_entropy(as_span(data)); },
        "Shannon entropy of a byte string, bits/byte in [0, 8]");

  py::class_<IconRaster>(m, "Icon")
      .def_property_readonly("width", [](const IconRaster& i) { return i.width; })
      .def_property_readonly("height", [](const IconRaster& i) { return i.height; })
      .def_property_readonly("rgba", &icon_to_array)
      .def_static("from_rgba", &icon_from_array, py::arg("rgba"));

  m.def("decode_icon", [](const py::bytes& data) { return decode_icon_image(as_span(data)); },
        "Decode one DIB or PNG icon payload");
  m.def("encode_png", [](const IconRaster& icon) {
    const auto bytes = encode_png(icon);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("extract_icons", [](const py::bytes& data) {
    const PeSummary pe = parse_pe(as_span(data));
    IconExtraction ext = extract_icons(pe);
    return py::make_tuple(std::move(ext.icons), ext.decode_failures);
  }, "All embedded icons of a PE plus the decode-failure tally");
  m.def("decode_ico", [](const py::bytes& data) {
    IconExtraction ext = decode_ico_file(as_span(data));
    return py::make_tuple(std::move(ext.icons), ext.decode_failures);
  });
  m.def("select_primary_icon", [](const std::vector<IconRaster>& icons) {
    return select_primary_icon(icons);
  });

  // --- raster + engineered features ---
  m.def("composite", [](const IconRaster& icon, double background) {
    return rgb_to_array(composite_to_rgb(icon, background));
  }, py::arg("icon"), py::arg("background") = 1.0);
  m.def("mc_features", [](const py::array_t<double>& rgb) {
    return vector_to_array(mc_features(rgb_from_array(rgb)));
  }, "The 26 grid summary statistics");
  m.def("hog_features", [](const py::array_t<double>& rgb) {
    return vector_to_array(hog_features(prepare_for_hog(rgb_from_array(rgb))));
  }, "The 576 oriented-gradient features on the 24x24 rendering");

  // --- autoencoder ---
  py::class_<AeModel>(m, "AeModel")
      .def_property_readonly("latent_dim", [](const AeModel& a) { return a.arch.latent_dim(); })
      .def_readonly("corpus_hash", &AeModel::corpus_hash)
      .def("encode", [](const AeModel& model, const py::array_t<double>& rgb) {
        return vector_to_array(ae_encode(model, rgb_from_array(rgb)));
      })
      .def("save", &save_ae_model, py::arg("path"))
      .def_static("load", &load_ae_model, py::arg("path"))
      .def_static("init", [](std::uint64_t seed) {
        AeConfig cfg;
        cfg.seed = seed;
        return ae_init(cfg);
      }, py::arg("seed") = 0);

  m.def("train_ae", [](const std::vector<py::array_t<double>>& images, std::uint64_t seed,
                       double learning_rate, int batch_size, int epochs) {
    AeConfig cfg;
    cfg.seed = seed;
    cfg.learning_rate = learning_rate;
    cfg.batch_size = batch_size;
    cfg.epochs = epochs;
    AeModel model = ae_init(cfg);
    std::vector<std::vector<double>> dataset;
    for (const auto& img : images) {
      dataset.push_back(image_to_tensor(resize_bilinear(rgb_from_array(img),
                                                        model.arch.input_size,
                                                        model.arch.input_size)));
    }
    auto [trained, trace] = ae_train(std::move(model), dataset, cfg);
    return py::make_tuple(std::move(trained), vector_to_array(trace.epoch_mse));
  }, py::arg("images"), py::arg("seed") = 0, py::arg("learning_rate") = 1e-3,
     py::arg("batch_size") = 16, py::arg("epochs") = 100);

  m.def("ae_gradient_check", &ae_gradient_check, py::arg("seed") = 0);

  m.def("icon_features", [](const py::array_t<double>& rgb, const AeModel& ae) {
    const RgbImage img = rgb_from_array(rgb);
    const auto mc = mc_features(img);
    const auto hog = hog_features(prepare_for_hog(img));
    const auto latent = ae_encode(ae, img);
    std::vector<double> out;
    out.reserve(kIconFeatureDim);
    out.insert(out.end(), mc.begin(), mc.end());
    out.insert(out.end(), hog.begin(), hog.end());
    out.insert(out.end(), latent.begin(), latent.end());
    return vector_to_array(out);
  }, "The full 1114-value icon feature vector (MC ++ HOG ++ AE)");

  // --- clustering ---
  py::class_<ClusterModel>(m, "ClusterModel")
      .def_property_readonly("num_dense_clusters",
                             [](const ClusterModel& c) { return c.num_dense_clusters; })
      .def_property_readonly("num_outlier_clusters",
                             [](const ClusterModel& c) { return c.num_outlier_clusters; })
      .def_property_readonly("num_ids", &ClusterModel::num_ids)
      .def_property_readonly("training_ids",
                             [](const ClusterModel& c) { return c.final_ids; })
      .def("assign", [](const ClusterModel& model, const py::array_t<double>& x) {
        const auto arr = py::array_t<double, py::array::c_style | py::array::forcecast>(x);
        if (arr.ndim() != 1) throw py::value_error("expected a 1-D feature vector");
        const Assignment a =
            assign(model, std::span<const double>(arr.data(), static_cast<std::size_t>(arr.size())));
        return py::make_tuple(a.cluster_id, a.outlier);
      })
      .def("save", &save_cluster_model, py::arg("path"))
      .def_static("load", &load_cluster_model, py::arg("path"))
      .def_static("build", [](const py::array_t<double>& features, int min_cluster_size,
                              int min_samples, int knn_k, int outlier_k_max, std::uint64_t seed) {
        ClusterParams params;
        params.min_cluster_size = min_cluster_size;
        params.min_samples = min_samples;
        params.knn_k = knn_k;
        params.outlier_k_max = outlier_k_max;
        params.seed = seed;
        return build_cluster_model(matrix_from_array(features), params);
      }, py::arg("features"), py::arg("min_cluster_size") = 15, py::arg("min_samples") = 0,
         py::arg("knn_k") = 5, py::arg("outlier_k_max") = 50, py::arg("seed") = 0);

  m.def("silhouette", [](const py::array_t<double>& X, const std::vector<int>& labels) {
    return silhouette(matrix_from_array(X), labels);
  });
  m.def("kmeans", [](const py::array_t<double>& X, int k, std::uint64_t seed) {
    const KmeansResult r = kmeans_fit(matrix_from_array(X), k, seed);
    return py::make_tuple(matrix_to_array(r.centroids), r.labels, r.inertia);
  }, py::arg("X"), py::arg("k"), py::arg("seed") = 0);
  m.def("hdbscan", [](const py::array_t<double>& X, int min_cluster_size, int min_samples) {
    const HdbscanResult r = hdbscan_fit(matrix_from_array(X), min_cluster_size, min_samples);
    return py::make_tuple(r.labels, r.num_clusters);
  }, py::arg("X"), py::arg("min_cluster_size"), py::arg("min_samples"));

  // --- classifiers ---
  py::class_<LinearModel>(m, "LinearModel")
      .def_property_readonly("weights",
                             [](const LinearModel& l) { return vector_to_array(l.weights); })
      .def_readonly("bias", &LinearModel::bias)
      .def_readonly("alpha", &LinearModel::alpha)
      .def_readonly("converged", &LinearModel::converged);

  m.def("fit_model", [](const std::string& kind, const py::array_t<double>& X,
                        const std::vector<int>& y, double alpha) {
    return fit_model(model_kind_from_name(kind), matrix_from_array(X), y, alpha);
  }, py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("alpha"),
     "kind is one of 'logreg_l1', 'logreg_l2', 'linear_svm'; y uses -1/+1");
  m.def("predict_scores", [](const LinearModel& model, const py::array_t<double>& X) {
    return vector_to_array(predict_scores(model, matrix_from_array(X)));
  });
  m.def("roc_auc", [](const std::vector<double>& scores, const std::vector<int>& y) {
    const RocCurve roc = roc_auc(scores, y);
    py::array_t<double> pts({static_cast<py::ssize_t>(roc.points.size()), py::ssize_t{2}});
    double* data = pts.mutable_data();
    for (std::size_t i = 0; i < roc.points.size(); ++i) {
      data[2 * i] = roc.points[i].first;
      data[2 * i + 1] = roc.points[i].second;
    }
    return py::make_tuple(pts, roc.auc);
  });
  m.def("evaluate", [](const LinearModel& model, const py::array_t<double>& X,
                       const std::vector<int>& y) {
    const EvaluationReport r = evaluate(model, matrix_from_array(X), y);
    py::dict out;
    out["accuracy"] = r.accuracy;
    out["tpr"] = r.tpr;
    out["tnr"] = r.tnr;
    out["auc"] = r.auc;
    return out;
  });
  m.def("tune_alpha", [](const std::string& kind, const py::array_t<double>& X,
                         const std::vector<int>& y, const std::vector<double>& grid, int k,
                         std::uint64_t seed) {
    const TuneResult t = tune_alpha(model_kind_from_name(kind), matrix_from_array(X), y, grid, k,
                                    seed);
    py::list curve;
    for (const auto& pt : t.curve) {
      py::dict row;
      row["alpha"] = pt.alpha;
      row["cv_accuracy"] = pt.accuracy_mean;
      row["cv_accuracy_std"] = pt.accuracy_std;
      row["cv_tpr"] = pt.tpr_mean;
      row["cv_tpr_std"] = pt.tpr_std;
      row["cv_tnr"] = pt.tnr_mean;
      row["cv_tnr_std"] = pt.tnr_std;
      curve.append(row);
    }
    return py::make_tuple(t.best_alpha, curve);
  }, py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("grid"), py::arg("k") = 4,
     py::arg("seed") = 0);
  m.def("default_alpha_grid", [] { return vector_to_array(default_alpha_grid()); });
  m.def("stratified_split", &stratified_split, py::arg("y"), py::arg("test_fraction"),
        py::arg("seed"));
  m.def("stratified_kfold", &stratified_kfold, py::arg("y"), py::arg("k"), py::arg("seed"));
  m.def("one_hot", &one_hot, py::arg("cluster_id"), py::arg("num_ids"));

  m.attr("MC_DIM") = kMcDim;
  m.attr("HOG_DIM") = kHogDim;
  m.attr("AE_DIM") = kAeDim;
  m.attr("ICON_FEATURE_DIM") = kIconFeatureDim;
}
