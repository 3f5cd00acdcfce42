// planartrack: command-line front end for the planar tracking library.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "ptk/bench.hpp"
#include "ptk/condnum.hpp"
#include "ptk/geometry.hpp"
#include "ptk/kernels.hpp"
#include "ptk/losses.hpp"
#include "ptk/raster.hpp"
#include "ptk/resest.hpp"
#include "ptk/simest.hpp"
#include "ptk/tracker.hpp"

namespace fs = std::filesystem;
using namespace ptk;

namespace {

constexpr const char* kSchemaVersion = "planartrack config schema 1";

std::vector<std::string> list_pgm(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm")
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .pgm frames in " + dir);
    return files;
}

Homography read_single_h(const std::string& path) {
    const auto hs = read_homography_file(path);
    if (hs.empty()) throw std::runtime_error("empty homography file: " + path);
    return hs.front();
}

void add_seed(CLI::App* cmd, std::uint64_t& seed) {
    cmd->add_option("--seed", seed, "RNG seed (required)")->required();
}

int cmd_condnum(const StudyConfig& cfg, const std::string& out_csv,
                const std::string& out_hist) {
    const CondStudyResult res = monte_carlo_study(cfg);
    write_samples_csv(out_csv, res.samples);
    write_histogram_csv(out_hist, log10_histogram(res.samples));
    std::printf("subgroup=%s samples=%llu accepted=%zu rejected=%llu "
                "max_cond=%.6g p99_cond=%.6g\n",
                subgroup_name(cfg.subgroup).c_str(),
                (unsigned long long)cfg.n_samples, res.samples.size(),
                (unsigned long long)res.rejected, res.max_cond, res.p99_cond);
    return 0;
}

int cmd_track(const std::string& frames_dir, const std::string& init_path,
              const std::string& out_path, const TrackerConfig& cfg) {
    const auto files = list_pgm(frames_dir);
    std::vector<Raster> frames;
    frames.reserve(files.size());
    for (const auto& f : files) frames.push_back(read_pgm(f));

    const auto init = bench::read_corner_file(init_path);
    if (init.empty()) throw std::runtime_error("empty init file: " + init_path);

    const auto results = run_sequence(frames, init.front(), cfg);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    char buf[64];
    int lost = 0;
    for (const auto& r : results) {
        for (int i = 0; i < 4; ++i) {
            const Eigen::Vector2d c = r.quad.corner(i);
            std::snprintf(buf, sizeof buf, "%.17g %.17g ", c.x(), c.y());
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g %d\n", r.confidence, int(r.lost));
        out << buf;
        lost += r.lost;
    }
    std::printf("frames=%zu lost=%d\n", results.size(), lost);
    return 0;
}

int cmd_losscheck(std::uint64_t seed) {
    // central finite-difference check of every scalar-grad loss
    std::mt19937_64 rng(seed);
    auto u = [&](double lo, double hi) {
        return uniform_draw(rng(), lo, hi);
    };
    const int w = 8, h = 8;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd pred(h, w), label(h, w);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                pred(i, j) = u(0.01, 0.99);
                label(i, j) = u(0.0, 1.0);
            }
        const auto sets = losses::build_label_sets(pred, label, 0.7, 10);
        for (auto make : {+[](const Eigen::MatrixXd& p, const Eigen::MatrixXd& l,
                              const losses::LabelSets& s) {
                              return losses::loss_cls(p, l, s);
                          },
                          +[](const Eigen::MatrixXd& p, const Eigen::MatrixXd& l,
                              const losses::LabelSets&) {
                              return losses::loss_cls2(p, l);
                          }}) {
            const auto base = make(pred, label, sets);
            for (int k = 0; k < 10; ++k) {
                const int i = int(rng() % h), j = int(rng() % w);
                const double step = 1e-6;
                Eigen::MatrixXd pp = pred, pn = pred;
                pp(i, j) += step;
                pn(i, j) -= step;
                const double fd = (make(pp, label, sets).value -
                                   make(pn, label, sets).value) /
                                  (2 * step);
                const double an = base.grad(i, j);
                const double rel =
                    std::abs(fd - an) / std::max(1.0, std::abs(an));
                worst = std::max(worst, rel);
            }
        }
    }
    std::printf("losscheck max_rel_grad_err=%.3g\n", worst);
    if (worst > 1e-4) {
        std::fprintf(stderr, "ERROR losscheck gradient mismatch %.3g\n", worst);
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) try {
    CLI::App app{"planar tracking via homography decomposition"};
    app.set_version_flag("--version", kSchemaVersion);
    app.set_config("--config", "", "flat key=value config file");
    app.allow_config_extras(false);
    app.require_subcommand(1);

    int workers = 1;
    app.add_option("--workers", workers, "worker thread count");
    bool no_simd = false;
    app.add_flag("--no-simd", no_simd, "force scalar kernels");

    // condnum
    auto* c_cond = app.add_subcommand("condnum", "Monte-Carlo conditioning study");
    StudyConfig scfg;
    std::string subgroup = "full8";
    std::string cond_csv = "cond_samples.csv", cond_hist = "cond_hist.csv";
    c_cond->add_option("--samples", scfg.n_samples, "sample count");
    c_cond->add_option("--subgroup", subgroup,
                       "full8|translation_known|similarity_known");
    c_cond->add_option("--box-edge", scfg.box_edge, "probe box edge length");
    c_cond->add_option("--out-csv", cond_csv, "per-sample CSV path");
    c_cond->add_option("--out-hist", cond_hist, "histogram CSV path");
    add_seed(c_cond, scfg.seed);

    // raystudy
    auto* c_ray = app.add_subcommand("raystudy", "conditioning along a ray");
    int ray_steps = 50;
    double ray_box = 127.0;
    std::string ray_out = "ray.csv";
    c_ray->add_option("--steps", ray_steps, "points along the ray")
        ->check(CLI::Range(2, 100000));
    c_ray->add_option("--box-edge", ray_box, "probe box edge length");
    c_ray->add_option("--out", ray_out, "CSV path");

    // warp
    auto* c_warp = app.add_subcommand("warp", "apply a homography to an image");
    std::string warp_in, warp_h, warp_out = "warped.pgm";
    int warp_w = 0, warp_hgt = 0;
    c_warp->add_option("--input", warp_in, "input PGM")->required();
    c_warp->add_option("--homography", warp_h, "homography file (first line used)")
        ->required();
    c_warp->add_option("--width", warp_w, "output width (default input)");
    c_warp->add_option("--height", warp_hgt, "output height (default input)");
    c_warp->add_option("--out", warp_out, "output PGM");

    // rsew
    auto* c_rsew = app.add_subcommand("rsew", "log-polar resampling");
    std::string rsew_in, rsew_out = "rsew.pgm";
    int rsew_n = 0;
    double rsew_t1 = 0.0, rsew_t2 = 0.0;
    c_rsew->add_option("--input", rsew_in, "input PGM (square)")->required();
    c_rsew->add_option("--n", rsew_n, "output edge (even; default from input)");
    c_rsew->add_option("--t1", rsew_t1, "pivot x offset from center");
    c_rsew->add_option("--t2", rsew_t2, "pivot y offset from center");
    c_rsew->add_option("--out", rsew_out, "output PGM");

    // simest
    auto* c_sim = app.add_subcommand("simest", "similarity estimation");
    std::string sim_t, sim_s, sim_out = "similarity.txt";
    SimestConfig sim_cfg;
    c_sim->add_option("--template", sim_t, "template PGM")->required();
    c_sim->add_option("--search", sim_s, "search PGM")->required();
    c_sim->add_option("--stride", sim_cfg.stride, "correlation stride");
    c_sim->add_option("--rsew-n", sim_cfg.rsew_n, "log-polar grid edge");
    c_sim->add_option("--out", sim_out, "estimate output path");

    // resest
    auto* c_res = app.add_subcommand("resest", "residual refinement");
    std::string res_t, res_w, res_out = "residual.txt";
    RefineConfig res_cfg;
    c_res->add_option("--template", res_t, "template PGM")->required();
    c_res->add_option("--warped", res_w, "aligned search patch PGM")->required();
    c_res->add_option("--max-iters", res_cfg.max_iters, "iteration cap");
    c_res->add_option("--out", res_out, "homography output path");

    // track
    auto* c_track = app.add_subcommand("track", "track a frame directory");
    std::string tr_dir, tr_init, tr_out = "results.txt";
    TrackerConfig tr_cfg;
    bool no_sim = false, no_res = false;
    c_track->add_option("--frames", tr_dir, "directory of .pgm frames")->required();
    c_track->add_option("--init", tr_init, "corner file (first line = init quad)")
        ->required();
    c_track->add_option("--out", tr_out, "per-frame results path");
    c_track->add_option("--stride", tr_cfg.simest.stride, "correlation stride");
    c_track->add_option("--lost-threshold", tr_cfg.lost_threshold,
                        "confidence below which a frame is lost");
    c_track->add_flag("--no-similarity", no_sim, "disable the similarity stage");
    c_track->add_flag("--no-residual", no_res, "disable the residual stage");

    // synth
    auto* c_synth = app.add_subcommand("synth", "synthesize a sequence");
    std::string sy_base, sy_dir = "synth_out";
    int sy_frames = 100, sy_segment = 25, sy_object = 127;
    double sy_amp = 0.25, sy_blur = 0.0, sy_noise = 0.0;
    std::uint64_t sy_seed = 0;
    c_synth->add_option("--base", sy_base, "base PGM image")->required();
    c_synth->add_option("--frames", sy_frames, "frame count")
        ->check(CLI::PositiveNumber);
    c_synth->add_option("--segment", sy_segment, "frames between keyframes");
    c_synth->add_option("--object-size", sy_object, "tracked box edge length");
    c_synth->add_option("--amplitude", sy_amp, "range fraction for keyframes");
    c_synth->add_option("--blur", sy_blur, "gaussian blur sigma");
    c_synth->add_option("--noise", sy_noise, "additive noise sigma");
    c_synth->add_option("--out-dir", sy_dir, "output directory");
    add_seed(c_synth, sy_seed);

    // eval
    auto* c_eval = app.add_subcommand("eval", "evaluate predictions");
    std::string ev_pred, ev_gt, ev_pred_h, ev_gt_h, ev_out = "report.csv";
    double ev_box = 127.0;
    c_eval->add_option("--pred", ev_pred, "predicted corner file")->required();
    c_eval->add_option("--gt", ev_gt, "ground-truth corner file")->required();
    c_eval->add_option("--pred-h", ev_pred_h, "predicted homography file");
    c_eval->add_option("--gt-h", ev_gt_h, "ground-truth homography file");
    c_eval->add_option("--box-edge", ev_box, "template box edge for HSR");
    c_eval->add_option("--out", ev_out, "report CSV path");

    // losscheck
    auto* c_loss = app.add_subcommand("losscheck", "loss gradient self-check");
    std::uint64_t loss_seed = 0;
    add_seed(c_loss, loss_seed);

    CLI11_PARSE(app, argc, argv);

    if (no_simd) kernels::set_backend(kernels::Backend::scalar);

    if (*c_cond) {
        scfg.subgroup = parse_subgroup(subgroup);
        scfg.workers = workers;
        return cmd_condnum(scfg, cond_csv, cond_hist);
    }
    if (*c_ray) {
        write_ray_csv(ray_out, ray_study({}, ray_steps, ray_box));
        std::printf("wrote %s\n", ray_out.c_str());
        return 0;
    }
    if (*c_warp) {
        const Raster img = read_pgm(warp_in);
        const int ow = warp_w > 0 ? warp_w : img.width;
        const int oh = warp_hgt > 0 ? warp_hgt : img.height;
        write_pgm(warp_out, warp_homography(img, read_single_h(warp_h), ow, oh));
        return 0;
    }
    if (*c_rsew) {
        write_pgm(rsew_out, rsew_warp(read_pgm(rsew_in), rsew_t1, rsew_t2, rsew_n));
        return 0;
    }
    if (*c_sim) {
        const auto est =
            estimate_similarity(read_pgm(sim_t), read_pgm(sim_s), sim_cfg);
        std::ofstream out(sim_out);
        if (!out) throw std::runtime_error("cannot write " + sim_out);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g\n",
                      est.t.x(), est.t.y(), est.gamma, est.theta, est.confidence);
        out << buf;
        std::printf("t=(%.3f,%.3f) gamma=%.4f theta=%.4f conf=%.3f\n",
                    est.t.x(), est.t.y(), est.gamma, est.theta, est.confidence);
        return 0;
    }
    if (*c_res) {
        const auto rr = refine_residual(read_pgm(res_t), read_pgm(res_w), res_cfg);
        write_homography_file(res_out, {rr.h});
        std::printf("rms=%.6g iterations=%d lost=%d\n", rr.rms, rr.iterations,
                    int(rr.lost));
        return rr.lost ? 2 : 0;
    }
    if (*c_track) {
        tr_cfg.use_similarity = !no_sim;
        tr_cfg.use_residual = !no_res;
        return cmd_track(tr_dir, tr_init, tr_out, tr_cfg);
    }
    if (*c_synth) {
        const Raster base = read_pgm(sy_base);
        const double cx = (base.width - 1) / 2.0, cy = (base.height - 1) / 2.0;
        const double half = (sy_object - 1) / 2.0;
        const CornerQuad object =
            CornerQuad::box(cx - half, cy - half, cx + half, cy + half);

        ParamRanges r;
        std::mt19937_64 rng(sy_seed);
        auto draw = [&](double lo, double hi) {
            return uniform_draw(rng(), sy_amp * lo, sy_amp * hi);
        };
        bench::MotionScript script;
        script.blur_sigma = sy_blur;
        script.noise_sigma = sy_noise;
        script.keyframes.push_back({0, TransformParams::identity()});
        for (int f = sy_segment; f < sy_frames + sy_segment; f += sy_segment) {
            TransformParams x;
            x.t1 = draw(r.t_lo, r.t_hi);
            x.t2 = draw(r.t_lo, r.t_hi);
            x.gamma = 1.0 + draw(r.gamma_lo - 1.0, r.gamma_hi - 1.0);
            x.theta = draw(r.theta_lo, r.theta_hi);
            x.k1 = 1.0 + draw(r.k1_lo, r.k1_hi);
            x.k2 = draw(r.k2_lo, r.k2_hi);
            x.nu1 = draw(r.nu_lo, r.nu_hi);
            x.nu2 = draw(r.nu_lo, r.nu_hi);
            script.keyframes.push_back({std::min(f, sy_frames - 1), x});
            if (f >= sy_frames - 1) break;
        }

        const auto seq = bench::synthesize(base, object, script, sy_seed);
        fs::create_directories(sy_dir);
        char name[32];
        for (std::size_t i = 0; i < seq.frames.size(); ++i) {
            std::snprintf(name, sizeof name, "frame_%05zu.pgm", i);
            write_pgm((fs::path(sy_dir) / name).string(), seq.frames[i]);
        }
        bench::write_corner_file((fs::path(sy_dir) / "gt_corners.txt").string(),
                                 seq.gt_quads);
        write_homography_file((fs::path(sy_dir) / "gt_h.txt").string(), seq.gt_h);
        std::printf("wrote %zu frames to %s\n", seq.frames.size(), sy_dir.c_str());
        return 0;
    }
    if (*c_eval) {
        const auto pred = bench::read_corner_file(ev_pred);
        const auto gt = bench::read_corner_file(ev_gt);
        std::vector<Homography> ph, gh;
        if (!ev_pred_h.empty() && !ev_gt_h.empty()) {
            ph = read_homography_file(ev_pred_h);
            gh = read_homography_file(ev_gt_h);
        } else {
            // derive per-frame homographies from the corner quads
            const CornerQuad box = CornerQuad::box(0, 0, ev_box - 1, ev_box - 1);
            for (const auto& q : pred) ph.push_back(dlt_from_quads(box, q));
            for (const auto& q : gt) gh.push_back(dlt_from_quads(box, q));
        }
        const CornerQuad box = CornerQuad::box(0, 0, ev_box - 1, ev_box - 1);
        const auto report = bench::evaluate(pred, gt, ph, gh, box);
        bench::write_report_csv(ev_out, report);
        std::printf("avg_prec=%.4f avg_hsr=%.4f avg_cp=%.4f avg_sr=%.4f\n",
                    report.avg_prec, report.avg_hsr, report.avg_cp, report.avg_sr);
        return 0;
    }
    if (*c_loss) return cmd_losscheck(loss_seed);

    return 0;
} catch (const std::exception& e) {
    std::fprintf(stderr, "ERROR %s\n", e.what());
    return 1;
}
