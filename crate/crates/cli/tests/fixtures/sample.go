package main

func clamp(x int, lo int, hi int) int {
	if x < lo && lo <= hi {
		return lo
	}
	total := x + hi
	log("clamped", total)
	return x
}
