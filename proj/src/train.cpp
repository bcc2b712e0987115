#include "stf/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <ostream>

#include "stf/metrics.hpp"
#include "stf/rng.hpp"

namespace stf {

namespace {

constexpr std::uint64_t kSplitSalt = 0x5b1e75a1;
constexpr std::uint64_t kEpochSalt = 0xe70c4000;

}  // namespace

LossKind loss_kind_from(const std::string& name) {
    if (name == "mse") {
        return LossKind::kMse;
    }
    if (name == "smooth_l1") {
        return LossKind::kSmoothL1;
    }
    throw ConfigError("loss: unknown kind '" + name + "'");
}

Tensor loss_fn(const PredictionSet& pred, const SceneWindow& w, LossKind kind) {
    if (pred.n != w.n || pred.t_pred != w.t_pred) {
        throw ContractError("loss: prediction shape does not match window");
    }
    long long pairs = 0;
    Tensor total;
    for (int t = 0; t < w.t_pred; ++t) {
        std::vector<double> truth(static_cast<std::size_t>(w.n) * 2, 0.0);
        std::vector<double> maskmat(static_cast<std::size_t>(w.n) * 2, 0.0);
        int scored = 0;
        for (int i = 0; i < w.n; ++i) {
            if (!w.predicted(i) || !w.valid(w.t_his + t, i)) {
                continue;
            }
            truth[static_cast<std::size_t>(i) * 2] = w.px(w.t_his + t, i);
            truth[static_cast<std::size_t>(i) * 2 + 1] = w.py(w.t_his + t, i);
            maskmat[static_cast<std::size_t>(i) * 2] = 1.0;
            maskmat[static_cast<std::size_t>(i) * 2 + 1] = 1.0;
            ++scored;
        }
        pairs += scored;
        if (scored == 0) {
            continue;
        }
        Tensor diff = sub(pred.step_positions[static_cast<std::size_t>(t)],
                          Tensor({w.n, 2}, std::move(truth)));
        Tensor per = kind == LossKind::kMse ? mul(diff, diff) : smooth_l1(diff);
        Tensor masked = mul(per, Tensor({w.n, 2}, std::move(maskmat)));
        Tensor step_sum = sum_all(masked);
        total = total.empty() ? step_sum : add(total, step_sum);
    }
    if (pairs == 0) {
        throw ContractError("loss: no scored (agent, horizon) pairs");
    }
    return scale(total, 1.0 / static_cast<double>(pairs));
}

std::vector<TrainItem> prepare_items(const std::vector<SceneWindow>& raw, const RunConfig& cfg) {
    GraphConfig gc{cfg.d_close, cfg.t_his};
    std::vector<TrainItem> items;
    items.reserve(raw.size());
    for (const auto& w : raw) {
        TrainItem item;
        item.window = w.normalized ? w : normalize_window(w);
        item.graph = build_graph(item.window, gc);
        items.push_back(std::move(item));
    }
    return items;
}

void split_items(std::size_t count, std::uint64_t seed, std::vector<std::size_t>& train,
                 std::vector<std::size_t>& held_out) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(mix_seed(seed, kSplitSalt));
    rng.shuffle(idx);
    const std::size_t n_val = count / 5;
    train.assign(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(n_val));
    held_out.assign(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
    std::sort(train.begin(), train.end());
    std::sort(held_out.begin(), held_out.end());
}

double train_epoch(StfModel& model, const std::vector<TrainItem>& items,
                   const std::vector<std::size_t>& order_pool, OptimizerState& opt,
                   const RunConfig& cfg, long long epoch) {
    if (order_pool.empty()) {
        throw ContractError("train_epoch: empty window set");
    }
    const LossKind lk = loss_kind_from(cfg.loss);
    std::vector<std::size_t> order = order_pool;
    Rng rng(mix_seed(cfg.seed, kEpochSalt + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t end =
            std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
        model.tape().reset();
        Tensor batch_total;
        for (std::size_t k = start; k < end; ++k) {
            const std::size_t wi = order[k];
            Tensor l;
            try {
                PredictionSet pred = model.forward(items[wi].window, items[wi].graph);
                l = loss_fn(pred, items[wi].window, lk);
            } catch (const Error& e) {
                throw Error("training aborted at window " + std::to_string(wi) + ": " + e.what());
            }
            if (!std::isfinite(l.value())) {
                throw Error("training aborted at window " + std::to_string(wi) +
                            ": non-finite loss");
            }
            loss_sum += l.value();
            batch_total = batch_total.empty() ? l : add(batch_total, l);
        }
        Tensor objective = scale(batch_total, 1.0 / static_cast<double>(end - start));
        GradMap grads = model.tape().backward(objective);
        clip_gradients(grads, cfg.grad_clip);
        adam_step(model.tape(), grads, opt);
    }
    model.tape().reset();
    return loss_sum / static_cast<double>(order.size());
}

FitResult fit(StfModel& model, const std::vector<TrainItem>& items, OptimizerState& opt,
              const RunConfig& cfg, const std::string& out_dir, long long start_epoch) {
    if (items.empty()) {
        throw ContractError("fit: empty window set");
    }
    std::vector<std::size_t> train_idx, val_idx;
    split_items(items.size(), cfg.seed, train_idx, val_idx);

    FitResult result;
    auto save = [&](long long epoch, const std::string& name) {
        if (out_dir.empty()) {
            return;
        }
        const auto path = (std::filesystem::path(out_dir) / name).string();
        save_checkpoint_file(make_checkpoint(model, opt, epoch, cfg), path);
        result.checkpoints_written.push_back(path);
    };

    for (long long epoch = start_epoch + 1; epoch <= cfg.epochs; ++epoch) {
        HistoryRow row;
        row.epoch = epoch;
        row.loss = train_epoch(model, items, train_idx, opt, cfg, epoch);

        if (!val_idx.empty()) {
            std::vector<SceneWindow> vw;
            std::vector<PredictionSet> vp;
            for (std::size_t wi : val_idx) {
                model.tape().reset();
                vp.push_back(model.forward(items[wi].window, items[wi].graph));
                vw.push_back(items[wi].window);
            }
            model.tape().reset();
            const MetricsReport report = evaluate(vw, vp);
            if (report.wsade.has_value()) {
                row.has_wsade = true;
                row.wsade = *report.wsade;
            }
        }
        result.history.push_back(row);

        if (cfg.checkpoint_interval > 0 && epoch % cfg.checkpoint_interval == 0 &&
            epoch != cfg.epochs) {
            char name[64];
            std::snprintf(name, sizeof name, "checkpoint-%05lld.ckpt", epoch);
            save(epoch, name);
        }
    }
    save(cfg.epochs, "checkpoint-final.ckpt");
    return result;
}

void write_history_csv(const std::vector<HistoryRow>& history, std::ostream& os) {
    os << "epoch,loss,wsade\n";
    char buf[96];
    for (const auto& row : history) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,", row.epoch, row.loss);
        os << buf;
        if (row.has_wsade) {
            std::snprintf(buf, sizeof buf, "%.17g", row.wsade);
            os << buf;
        } else {
            os << "nan";
        }
        os << "\n";
    }
}

Checkpoint make_checkpoint(const StfModel& model, const OptimizerState& opt, long long epoch,
                           const RunConfig& cfg) {
    Checkpoint ck;
    ck.epoch = epoch;
    ck.config = config_entries(cfg);
    const GradTape& tape = model.tape();
    for (const auto& name : tape.param_names()) {
        const Tensor& p = tape.param(name);
        ck.tensors.push_back({name, p.shape(),
                              std::vector<double>(p.data(), p.data() + p.size())});
    }
    for (const auto& name : tape.param_names()) {
        const Tensor& p = tape.param(name);
        auto mit = opt.m.find(name);
        auto vit = opt.v.find(name);
        if (mit == opt.m.end() || vit == opt.v.end()) {
            continue;  // nothing accumulated yet
        }
        ck.tensors.push_back({"opt.m." + name, p.shape(), mit->second});
        ck.tensors.push_back({"opt.v." + name, p.shape(), vit->second});
    }
    ck.tensors.push_back({"opt.t", {1}, {static_cast<double>(opt.step_count)}});
    return ck;
}

void restore_model(StfModel& model, const Checkpoint& ck) {
    GradTape& tape = model.tape();
    std::size_t model_entries = 0;
    for (const auto& e : ck.tensors) {
        if (e.name.rfind("opt.", 0) != 0) {
            ++model_entries;
        }
    }
    if (model_entries != tape.param_names().size()) {
        throw IoError("checkpoint/config mismatch: parameter count differs");
    }
    for (const auto& name : tape.param_names()) {
        const Checkpoint::Entry* e = ck.find(name);
        if (e == nullptr) {
            throw IoError("checkpoint/config mismatch: missing parameter '" + name + "'");
        }
        Tensor& p = tape.param(name);
        if (e->shape != p.shape()) {
            throw IoError("checkpoint/config mismatch: shape of '" + name + "'");
        }
        std::copy(e->data.begin(), e->data.end(), p.data());
    }
}

void restore_optimizer(OptimizerState& opt, const Checkpoint& ck) {
    const Checkpoint::Entry* t = ck.find("opt.t");
    if (t == nullptr) {
        return;  // checkpoint predates any optimizer step
    }
    opt.step_count = static_cast<long long>(t->data[0]);
    opt.m.clear();
    opt.v.clear();
    for (const auto& e : ck.tensors) {
        if (e.name.rfind("opt.m.", 0) == 0) {
            opt.m[e.name.substr(6)] = e.data;
        } else if (e.name.rfind("opt.v.", 0) == 0) {
            opt.v[e.name.substr(6)] = e.data;
        }
    }
}

}  // namespace stf
