"""Writes the fixture maps and scenarios in the benchmark text formats."""

import random
from collections import deque
from pathlib import Path

HERE = Path(__file__).parent


def write_map(name, rows):
    h, w = len(rows), len(rows[0])
    text = f"type octile\nheight {h}\nwidth {w}\nmap\n" + "\n".join(rows) + "\n"
    (HERE / f"{name}.map").write_text(text)


def cells(rows):
    return [(x, y) for y, r in enumerate(rows) for x, c in enumerate(r) if c == "."]


def bfs(rows, src):
    h, w = len(rows), len(rows[0])
    dist = {src: 0}
    q = deque([src])
    while q:
        x, y = q.popleft()
        for nx, ny in ((x, y - 1), (x - 1, y), (x + 1, y), (x, y + 1)):
            if 0 <= nx < w and 0 <= ny < h and rows[ny][nx] == "." and (nx, ny) not in dist:
                dist[(nx, ny)] = dist[(x, y)] + 1
                q.append((nx, ny))
    return dist


def random_map(w, h, passable, seed):
    rng = random.Random(seed)
    while True:
        order = [(x, y) for y in range(h) for x in range(w)]
        rng.shuffle(order)
        blocked = set(order[: w * h - passable])
        rows = ["".join("@" if (x, y) in blocked else "." for x in range(w)) for y in range(h)]
        free = cells(rows)
        if len(bfs(rows, free[0])) == len(free):
            return rows


def write_scen(name, rows, count, seed):
    rng = random.Random(seed)
    free = cells(rows)
    starts = rng.sample(free, count)
    goals = rng.sample(free, count)
    lines = ["version 1"]
    for (sx, sy), (gx, gy) in zip(starts, goals):
        d = bfs(rows, (sx, sy))[(gx, gy)]
        lines.append(f"{d // 4}\t{name}.map\t{len(rows[0])}\t{len(rows)}\t{sx}\t{sy}\t{gx}\t{gy}\t{d:.8f}")
    (HERE / f"{name}-random-1.scen").write_text("\n".join(lines) + "\n")


def main():
    maps = {
        "empty-8-8": ["." * 8] * 8,
        "empty-48-48": ["." * 48] * 48,
        "random-32-32-20": random_map(32, 32, 819, seed=20),
    }
    for name, rows in maps.items():
        write_map(name, rows)
        write_scen(name, rows, min(1000, len(cells(rows))), seed=1)


if __name__ == "__main__":
    main()
