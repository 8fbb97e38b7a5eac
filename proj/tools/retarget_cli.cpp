// retarget: resize an image with a constrained Beltrami warp.
//
//   retarget --input in.png --output out.png --ratio 0.75 --labels labels.json --choice weak
//   retarget --seed-check

#include <retarget/diagnostics.hpp>
#include <retarget/image_io.hpp>
#include <retarget/labels_io.hpp>
#include <retarget/pipeline.hpp>
#include <retarget/selfcheck.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSelfCheck = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitFoldover = 4;

int exit_code_for(retarget::ErrorCode code)
{
    switch (code) {
    case retarget::ErrorCode::SolverFailure: return kExitSolver;
    case retarget::ErrorCode::Foldover: return kExitFoldover;
    default: return kExitInput;
    }
}

int fail(const char* code, int exit_code, const std::string& message)
{
    std::cerr << "error code=" << code << " exit=" << exit_code << ": " << message << '\n';
    return exit_code;
}

template <typename Writer>
void write_text(const std::string& path, Writer&& writer)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw retarget::Error(retarget::ErrorCode::InvalidInput, "cannot open " + path + " for writing");
    writer(out);
    if (!out) throw retarget::Error(retarget::ErrorCode::InvalidInput, "failed writing " + path);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Content-aware image retargeting with a constrained linear Beltrami solver."};
    app.set_version_flag("--version", "retarget 1.0");

    std::string input, output, labels_path, choice_name = "even";
    std::optional<double> ratio, beta;
    std::optional<int> width, height;
    bool chessboard = false, extremal = false, seed_check = false;
    std::size_t mesh_vertices = 1500;
    std::uint64_t seed = 20240601;
    std::string dump_mesh, dump_mu, dump_system;

    app.add_option("--input", input, "Source image (PNG or JPEG)");
    app.add_option("--output", output, "Target image; format follows the extension");
    app.add_option("--labels", labels_path, "Label document with object polygons and line polylines (pixel space)");
    auto* ratio_opt = app.add_option("--ratio", ratio, "Target width / source width; > 1 widens");
    auto* width_opt = app.add_option("--width", width, "Explicit target width in pixels");
    auto* height_opt = app.add_option("--height", height, "Explicit target height in pixels");
    ratio_opt->excludes(width_opt)->excludes(height_opt);
    width_opt->needs(height_opt);
    height_opt->needs(width_opt);
    app.add_option("--choice", choice_name, "Distortion distribution: even, weak or strong")
        ->check(CLI::IsMember({"even", "weak", "strong"}))
        ->capture_default_str();
    app.add_flag("--chessboard", chessboard, "Keep horizontal lines in M_h and vertical lines in M_v axis-aligned");
    app.add_flag("--extremal", extremal, "Force extremal mode (target narrower than the objects)");
    app.add_option("--beta", beta, "Extremal parameter in (0,100); default 50");
    app.add_option("--mesh-vertices", mesh_vertices, "Approximate vertex count of the mesh")->capture_default_str();
    app.add_option("--dump-mesh", dump_mesh, "Write source and warped meshes as OBJ text");
    app.add_option("--dump-mu", dump_mu, "Write the per-face Beltrami coefficient table of the solved map");
    app.add_option("--dump-system", dump_system, "Write the reduced linear system as row/col/value triplets");
    app.add_flag("--seed-check", seed_check, "Run the invariant self-test suite and exit");
    app.add_option("--seed", seed, "Random seed for --seed-check")->capture_default_str();
    app.footer("Exit codes: 0 ok, 1 self-check failure, 2 input error, 3 solver failure, 4 foldover.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("invalid_input", kExitInput, e.what());
    }

    if (seed_check) {
        bool all = true;
        for (const auto& r : retarget::selfcheck::run_all(seed)) {
            std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
            all = all && r.passed;
        }
        return all ? kExitOk : kExitSelfCheck;
    }

    if (input.empty()) return fail("invalid_input", kExitInput, "--input is required");
    if (output.empty()) return fail("invalid_input", kExitInput, "--output is required");
    if (!ratio && !width) return fail("invalid_input", kExitInput, "give --ratio or --width and --height");

    try {
        const retarget::RasterImage src = retarget::read_image(input);
        retarget::LabelSet labels;
        if (!labels_path.empty())
            labels = retarget::parse_labels_file(labels_path, retarget::ImageSize{double(src.width), double(src.height)});

        retarget::RetargetOptions opt;
        opt.ratio = ratio;
        opt.width = width;
        opt.height = height;
        opt.choice = *retarget::parse_choice(choice_name);
        opt.chessboard = chessboard;
        opt.extremal = extremal;
        opt.beta = beta;
        opt.mesh_vertices = mesh_vertices;
        opt.keep_system = !dump_system.empty();

        const retarget::RetargetResult res = retarget::retarget_image(src, labels, opt);
        retarget::write_image(output, res.image);

        const retarget::RetargetPlan& plan = res.plan;
        if (!dump_mesh.empty())
            write_text(dump_mesh, [&](std::ostream& os) {
                retarget::write_mesh_obj(os, plan.mesh, plan.warp.positions, plan.target.height);
            });
        if (!dump_mu.empty())
            write_text(dump_mu, [&](std::ostream& os) {
                retarget::write_mu_table(os, retarget::beltrami_of_map(plan.mesh, plan.warp.positions));
            });
        if (!dump_system.empty())
            write_text(dump_system, [&](std::ostream& os) { retarget::write_reduced_system(os, *plan.system); });

        for (const auto& w : plan.metrics.warnings) std::cerr << "warning: " << w << '\n';
        const auto& m = plan.metrics;
        std::printf("%dx%d -> %dx%d  vertices=%zu  solve_ms=%.1f  min_jacobian=%.6g  max_mu=%.6g", src.width,
                    src.height, res.image.width, res.image.height, plan.mesh.vertex_count(), m.solve_ms,
                    m.min_jacobian, m.max_abs_mu);
        if (m.object_scale) std::printf("  r_o=%.6g", *m.object_scale);
        if (m.extremal) std::printf("  extremal(beta=%g w'=%.6g h=%.6g)", m.extremal->beta, m.extremal->w_prime,
                                    m.extremal->h);
        std::printf("\n");
        return kExitOk;
    } catch (const retarget::Error& e) {
        return fail(retarget::to_string(e.code()), exit_code_for(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail("solver_failure", kExitSolver, e.what());
    }
}
