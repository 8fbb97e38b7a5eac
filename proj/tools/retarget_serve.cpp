// retarget-serve: local HTTP service for the labeling UI.
//
//   retarget_serve --port 8080 --ui-dir ui/dist

#include <retarget/service.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Local retargeting service."};
    retarget::service::ServiceConfig cfg;
    std::size_t max_upload_mb = cfg.max_upload_bytes >> 20;
    app.add_option("--host", cfg.host, "Bind address")->capture_default_str();
    app.add_option("--port", cfg.port, "Port; 0 picks a free one")->capture_default_str()->check(CLI::Range(0, 65535));
    app.add_option("--ui-dir", cfg.ui_dir, "Directory with the built UI bundle")->check(CLI::ExistingDirectory);
    app.add_option("--max-sessions", cfg.max_sessions, "Uploaded images kept in memory")->capture_default_str();
    app.add_option("--max-upload", max_upload_mb, "Upload limit in MiB")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    cfg.max_upload_bytes = max_upload_mb << 20;

    retarget::service::RetargetService svc(cfg);
    const int port = svc.bind();
    if (port < 0) {
        std::cerr << "error: cannot bind " << cfg.host << ':' << cfg.port << '\n';
        return 2;
    }
    std::cout << "listening on http://" << cfg.host << ':' << port << std::endl;
    return svc.listen_after_bind() ? 0 : 3;
}
