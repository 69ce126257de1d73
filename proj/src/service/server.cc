// Copyright 2026 The plantwi Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "plantwi/service/server.h"

#include <httplib.h>

#include <json.hpp>

#include "plantwi/error.h"
#include "plantwi/eval/experiment.h"
#include "plantwi/service/checkpoint.h"
#include "plantwi/service/dataset.h"
#include "plantwi/service/png_io.h"

namespace plantwi {
namespace {

using nlohmann::json;

void SendJson(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& code,
               const std::string& message) {
  json body = {{"error", code}, {"message", message}};
  if (code == "EmptyMask") {
    body["guidance"] =
        "The strokes produced no training pixels. Stroke plant regions that "
        "the current segmentation does not show as plant.";
  }
  SendJson(res, body, status);
}

// Wraps a handler so library errors map onto HTTP status codes.
template <typename Fn>
httplib::Server::Handler Guard(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      const std::string message = e.what();
      switch (e.code()) {
        case ErrorCode::kInvalidInput:
          SendError(res,
                    message.find("unknown scene") != std::string::npos ? 404 : 400,
                    "InvalidInput", message);
          break;
        case ErrorCode::kEmptyMask:
          SendError(res, 422, "EmptyMask", message);
          break;
        default:
          SendError(res, 500, std::string(ErrorCodeName(e.code())), message);
      }
    } catch (const json::exception& e) {
      SendError(res, 400, "InvalidInput", std::string("bad request body: ") + e.what());
    } catch (const std::exception& e) {
      SendError(res, 500, "Internal", e.what());
    }
  };
}

json PaletteJson(const std::vector<std::string>& names,
                 const std::vector<int32_t>& folding) {
  const Palette palette = ClassPalette(static_cast<int>(names.size()));
  json out = json::array();
  for (size_t c = 0; c < names.size(); ++c) {
    out.push_back({{"index", c},
                   {"name", names[c]},
                   {"color", palette[c]},
                   {"parent", names[folding[c]]}});
  }
  return out;
}

}  // namespace

struct HttpServer::Impl {
  std::shared_ptr<Session> session;
  httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<Session> session)
    : impl_(std::make_unique<Impl>()) {
  impl_->session = std::move(session);
  Session& s = *impl_->session;
  httplib::Server& server = impl_->server;

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Get("/api/scenes", Guard([&s](const httplib::Request&, httplib::Response& res) {
    json scenes = json::array();
    for (const std::string& id : s.SceneIds()) {
      const SyntheticScene& scene = s.scene(id);
      scenes.push_back(
          {{"id", id}, {"width", scene.rgb.width()}, {"height", scene.rgb.height()}});
    }
    SendJson(res, {{"scenes", scenes}, {"activeScene", s.active_scene()}});
  }));

  server.Get("/api/scene/:id", Guard([&s](const httplib::Request& req,
                                          httplib::Response& res) {
    const SyntheticScene& scene = s.scene(req.path_params.at("id"));
    res.set_content(EncodeRgbPng(scene.rgb), "image/png");
  }));

  server.Get("/api/segmentation/:id", Guard([&s](const httplib::Request& req,
                                                 httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const Segmentation seg = s.Segment(id);
    const std::string png = EncodePalettePng(
        LabelIndices(seg.labels), ClassPalette(static_cast<int>(seg.class_names.size())));
    SendJson(res, {{"sceneId", id},
                   {"width", seg.labels.width()},
                   {"height", seg.labels.height()},
                   {"png", Base64Encode(png)},
                   {"palette", PaletteJson(seg.class_names, seg.folding)}});
  }));

  server.Post("/api/stroke", Guard([&s](const httplib::Request& req,
                                        httplib::Response& res) {
    const json body = json::parse(req.body);
    std::vector<ImagePoint> points;
    for (const json& p : body.at("points")) {
      points.push_back({p.at("x").get<double>(), p.at("y").get<double>()});
    }
    const StrokeResult r = s.ApplyStroke(body.at("sceneId").get<std::string>(), points);
    Plane<uint8_t> preview(r.interaction_mask.height(), r.interaction_mask.width());
    for (size_t i = 0; i < preview.size(); ++i) {
      preview[i] = r.interaction_mask[i] ? 255 : 0;
    }
    SendJson(res, {{"maskPreview", Base64Encode(EncodeGray8Png(preview))},
                   {"pixelCount", r.pixel_count},
                   {"markedVoxels", r.marked_voxels},
                   {"skippedPoints", r.skipped}});
  }));

  server.Post("/api/imprint", Guard([&s](const httplib::Request& req,
                                         httplib::Response& res) {
    const json body = req.body.empty() ? json::object() : json::parse(req.body);
    const PoolingMethod method =
        ParsePoolingMethod(body.at("method").get<std::string>());
    const ImprintResult r = s.Imprint(method);
    SendJson(res, {{"before", MetricsToJson(r.before)},
                   {"after", MetricsToJson(r.after)},
                   {"elapsedMs", r.elapsed_ms},
                   {"className", r.class_name},
                   {"supportImages", r.support_images},
                   {"trainingPixels", r.training_pixels}});
  }));

  server.Post("/api/reset", Guard([&s](const httplib::Request&, httplib::Response& res) {
    s.Reset();
    SendJson(res, json::object());
  }));

  server.Get("/api/metrics", Guard([&s](const httplib::Request&, httplib::Response& res) {
    SendJson(res, MetricsToJson(s.CurrentMetrics()));
  }));
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::Run() { return impl_->server.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::WaitUntilReady() const { impl_->server.wait_until_ready(); }

std::shared_ptr<Session> LoadSession(const ServeConfig& config) {
  Model model = LoadCheckpoint(config.checkpoint_path);
  std::vector<NamedScene> scenes = LoadDataset(config.data_dir);
  if (scenes.empty()) Fail(ErrorCode::kIoError, "no scenes in " + config.data_dir);
  std::vector<SyntheticScene> test;
  if (config.test_dir.empty()) {
    for (const NamedScene& s : scenes) test.push_back(s.scene);
  } else {
    for (NamedScene& s : LoadDataset(config.test_dir)) test.push_back(std::move(s.scene));
    if (test.empty()) Fail(ErrorCode::kIoError, "no scenes in " + config.test_dir);
  }
  return std::make_shared<Session>(std::move(model), std::move(scenes),
                                   std::move(test), config.session);
}

}  // namespace plantwi
