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

// HTTP front end of a refinement Session.
//
//   GET  /api/scenes            scene list
//   GET  /api/scene/{id}        RGB PNG
//   GET  /api/segmentation/{id} {png: base64 indexed PNG, palette: [...]}
//   POST /api/stroke            {sceneId, points: [{x, y}]}
//                               -> {maskPreview: base64 PNG, pixelCount, ...}
//   POST /api/imprint           {method: "map" | "rap"}
//                               -> {before, after, elapsedMs, ...}
//   POST /api/reset             -> {}
//   GET  /api/metrics           current MetricsReport
//
// Errors come back as {error, message}: 400 for invalid input, 404 for an
// unknown scene, 422 for an empty training mask, 500 otherwise.

#ifndef PLANTWI_SERVICE_SERVER_H_
#define PLANTWI_SERVICE_SERVER_H_

#include <memory>
#include <string>

#include "plantwi/service/session.h"

namespace plantwi {

class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<Session> session);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds host:port; port 0 picks a free port. Returns the bound port or -1.
  int Bind(const std::string& host, int port);
  // Serves until Stop(); returns false when the listener failed.
  bool Run();
  void Stop();
  void WaitUntilReady() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string checkpoint_path;
  // Scenes used for metrics; defaults to data_dir.
  std::string test_dir;
  SessionOptions session;
};

// Loads the checkpoint and the datasets and builds a session. Throws IoError
// or CorruptCheckpoint when assets are missing or invalid.
std::shared_ptr<Session> LoadSession(const ServeConfig& config);

}  // namespace plantwi

#endif  // PLANTWI_SERVICE_SERVER_H_
