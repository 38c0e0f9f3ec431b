#include "liereduce/expr.hpp"

#include <algorithm>
#include <sstream>

namespace liereduce {

CtxPtr Context::make(const std::vector<std::string>& symbols) {
    auto ctx = CtxPtr(new Context());
    for (const auto& s : symbols) ctx->add_symbol(s);
    return ctx;
}

int Context::add_symbol(const std::string& name) {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    auto it = symbol_ids_.find(name);
    if (it != symbol_ids_.end()) return it->second;
    if (!atoms_.empty())
        throw Error("cannot add symbol '" + name + "' after function atoms exist");
    int id = static_cast<int>(symbols_.size());
    symbols_.push_back(name);
    symbol_ids_[name] = id;
    rebuild_ranks();
    return id;
}

void Context::declare_function(const std::string& name, int arity) {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    auto it = functions_.find(name);
    if (it != functions_.end()) {
        if (it->second != arity)
            throw Error("function '" + name + "' redeclared with different arity");
        return;
    }
    functions_[name] = arity;
}

std::optional<int> Context::function_arity(const std::string& name) const {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    auto it = functions_.find(name);
    if (it == functions_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> Context::find_symbol(const std::string& name) const {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    auto it = symbol_ids_.find(name);
    if (it == symbol_ids_.end()) return std::nullopt;
    return it->second;
}

std::string Context::symbol_name(int id) const {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    return symbols_.at(id);
}

int Context::var_count() const {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    return static_cast<int>(symbols_.size() + atoms_.size());
}

const Atom& Context::atom(int id) const {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    return atoms_.at(id - symbols_.size());
}

int Context::intern_atom(const std::string& name, std::vector<int> orders,
                         std::vector<Expr> args) {
    std::string key = Atom::make_key(name, orders, args);
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    auto fit = functions_.find(name);
    if (fit == functions_.end()) throw UnknownSymbol(name);
    if (fit->second != static_cast<int>(args.size()))
        throw Error("function '" + name + "' expects " + std::to_string(fit->second) +
                    " argument(s), got " + std::to_string(args.size()));
    if (orders.size() != args.size()) throw Error("derivative order list has wrong length");
    auto it = atom_ids_.find(key);
    if (it != atom_ids_.end()) return it->second;
    int id = static_cast<int>(symbols_.size() + atoms_.size());
    atoms_.push_back(Atom{name, std::move(orders), std::move(args), key});
    atom_ids_[key] = id;
    rebuild_ranks();
    return id;
}

// Canonical rank: symbols sorted by name first, atoms sorted by key after.
// Appending a new atom never changes the relative order of existing variables,
// so term vectors sorted under the old ranks remain sorted under the new ones.
void Context::rebuild_ranks() {
    std::size_t n = symbols_.size() + atoms_.size();
    std::vector<int> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        bool aa = a >= static_cast<int>(symbols_.size());
        bool ab = b >= static_cast<int>(symbols_.size());
        if (aa != ab) return ab;
        if (!aa) return symbols_[a] < symbols_[b];
        return atoms_[a - symbols_.size()].key < atoms_[b - symbols_.size()].key;
    });
    ranks_.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r) ranks_[ids[r]] = static_cast<int>(r);
}

int Context::rank(int id) const {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    return ranks_.at(id);
}

std::string Context::var_string(int id) const {
    std::lock_guard<std::recursive_mutex> lock(mutex_);
    if (id < static_cast<int>(symbols_.size())) return symbols_[id];
    const Atom& a = atoms_.at(id - symbols_.size());
    std::ostringstream os;
    os << a.name;
    int total = 0;
    for (int o : a.orders) total += o;
    if (total > 0) {
        if (a.orders.size() == 1) {
            if (a.orders[0] <= 2) {
                for (int k = 0; k < a.orders[0]; ++k) os << '\'';
            } else {
                os << "^(" << a.orders[0] << ")";
            }
        } else {
            os << "_{";
            for (std::size_t i = 0; i < a.orders.size(); ++i) {
                if (i) os << ',';
                os << a.orders[i];
            }
            os << '}';
        }
    }
    os << '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) os << ',';
        os << a.args[i].str();
    }
    os << ')';
    return os.str();
}

std::string Atom::make_key(const std::string& name, const std::vector<int>& orders,
                           const std::vector<Expr>& args) {
    std::ostringstream os;
    os << name << '|';
    for (int o : orders) os << o << ',';
    os << '|';
    for (const auto& a : args) os << a.str() << ';';
    return os.str();
}

} // namespace liereduce
