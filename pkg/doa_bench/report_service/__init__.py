"""Сервис отчётов: CSV-таблицы и SVG-графики по результатам экспериментов."""
